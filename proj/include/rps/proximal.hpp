#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rps/heat_kernel.hpp"
#include "rps/manifold.hpp"
#include "rps/riemannian_gaussian.hpp"

namespace rps {

// How the latent variable y | x is drawn (forward heat-flow half-step):
//   SeriesRejection     — rejection against the truncated heat-kernel series,
//                         proposals from the Riemannian Gaussian mu(s*eta, x, .)
//   GeodesicRandomWalk  — composition of tangent-Gaussian exponential steps
//   RGaussianVaradhan   — the Riemannian Gaussian itself (small-time kernel limit)
enum class MbiOracle { SeriesRejection, GeodesicRandomWalk, RGaussianVaradhan };

// How x | y is drawn (backward, target-tilted half-step):
//   TruncatedKernelRejection — rejection for exp(-f(x)) nu_l(eta, x, y)
//   VaradhanRejection        — rejection for exp(-f(x) - d(x,y)^2/(2 eta))
enum class RhkOracle { TruncatedKernelRejection, VaradhanRejection };

// Proposal center for the Varadhan backward oracle.
enum class ProposalCenter { Mode, Y };

// Target distribution pi proportional to exp(-f).
struct TargetSpec {
    Manifold man;
    std::function<double(const Point&)> f;
    std::function<Eigen::MatrixXd(const Point&)> euclidean_grad;
    double lipschitz = 0.0; // geodesic Lipschitz constant of f; 0 = unknown
    std::string description;

    static TargetSpec zero(const Manifold& man);
    // f(x) = -kappa <mu, x> on Sphere(mu.size()-1); L1 = kappa ||mu||.
    static TargetSpec vmf(const Eigen::VectorXd& mu, double kappa);
    // f(theta) = -kappa cos(theta) on the circle; L1 = kappa.
    static TargetSpec circle_cosine(double kappa);
    // f(X) = d(X, I)^4 / (2 sigma^2) on Spd(m); not Lipschitz (L1 = 0).
    static TargetSpec spd_quartic(int m, double sigma);
};

// Step-size triple for the Varadhan oracles with one-proposal acceptance
// guarantees: with C_eps = 1/log(1/eps),
//   eta = C_eps / (L1^2 d),  t = C_eps / (L1^2 (d-1)),  T = C_eps / (L1^2 (d+1)).
// Needs intrinsic dimension >= 2 (t diverges at d = 1).
struct TheoryParams {
    double c_eps = 0.0;
    double eta = 0.0;
    double t = 0.0;
    double total_time = 0.0;

    static TheoryParams varadhan_triple(double L1, int dim, double epsilon);
};

struct SamplerConfig {
    double eta = 0.1;
    MbiOracle mbi = MbiOracle::SeriesRejection;
    RhkOracle rhk = RhkOracle::TruncatedKernelRejection;
    ProposalCenter center = ProposalCenter::Mode;
    int grw_substeps = 1;

    // Proposal variance; 0 selects the rule t = eta * d/(d-1) for the series
    // oracles on Sphere(d) (factor 2 on the circle), t = eta for the
    // mode-centered Varadhan oracle, and the TheoryParams t for the
    // y-centered Varadhan oracle.
    double proposal_t = 0.0;

    double epsilon = 1e-3;          // drives C_eps for the y-centered form
    double lipschitz_override = 0.0; // used instead of TargetSpec.lipschitz when > 0

    double zeta = 1e-10;  // series accuracy for automatic level selection
    int level = -1;       // series level / wrap count; -1 = choose from zeta

    long rejection_cap = 1000000;
    bool clip_acceptance = true; // accept with min(1, V)

    double modefind_tol = 1e-8;
    int modefind_max_iters = 200;

    int calibration_grid = 4096;   // audit-grid size for offset calibration
    int calibration_refine = 50;   // local ascent refinements after the scan
};

struct StepStats {
    long mbi_proposals = 0;
    long mbi_accepts = 0;
    long rhk_proposals = 0;
    long rhk_accepts = 0;
    long clamp_events = 0;      // kernel values clamped before log
    long clip_events = 0;       // proposals whose unclipped V exceeded 1
    long varadhan_fallbacks = 0; // series oracle degraded to Varadhan (eta < 0.05 on spheres)
    long modefind_iters = 0;

    void accumulate(const StepStats& o);
};

struct ChainTrace {
    std::vector<Point> states;         // n_iters + 1 entries
    std::vector<StepStats> step_stats; // n_iters entries
    bool flagged = false;
    std::string flag_reason;
};

struct ModeFindReport {
    int iters = 0;
    double grad_norm = 0.0;
    bool converged = false;
};

// Deterministic audit/calibration grid of n points anchored at `center`:
// equispaced offsets on the circle, a Fibonacci lattice rotated to the center
// on Sphere(2), a fixed-key counter-RNG point set rotated to the center on
// higher spheres.  Unavailable on SPD (calibration there is analytic).
std::vector<Point> audit_grid(const Manifold& man, int n, const Point& center);

// The proximal sampler: alternates the forward oracle y ~ nu(eta, x, .) and
// the backward oracle x ~ exp(-f) nu(eta, ., y).  Construction resolves the
// configuration (series levels, proposal variances, forward-oracle offset)
// once so chains pay no per-step setup.
class ProximalSampler {
public:
    ProximalSampler(TargetSpec target, SamplerConfig cfg);
    ~ProximalSampler();
    ProximalSampler(ProximalSampler&&) noexcept;
    ProximalSampler& operator=(ProximalSampler&&) noexcept;

    const TargetSpec& target() const;
    const SamplerConfig& config() const; // resolved values
    MbiOracle resolved_mbi() const;
    RhkOracle resolved_rhk() const;
    double mbi_offset() const;     // calibrated C for the series forward oracle
    double mbi_proposal_t() const; // resolved forward proposal variance
    double rhk_proposal_t() const; // resolved backward proposal variance

    Point sample_mbi(const Point& x, CounterRng& rng, StepStats* stats = nullptr) const;
    Point sample_rhk(const Point& y, CounterRng& rng, StepStats* stats = nullptr) const;
    Point find_mode(const Point& y, ModeFindReport* report = nullptr) const;
    Point step(const Point& x, CounterRng& rng, StepStats* stats = nullptr) const;
    ChainTrace run_chain(const Point& init, int n_iters, CounterRng rng) const;

    // Unclipped log acceptance ratios, exposed for calibration audits.
    double log_accept_mbi(const Point& x, const Point& y, StepStats* stats = nullptr) const;
    double log_accept_rhk(const Point& y, const Point& proposal_center, double offset,
                          const Point& x, StepStats* stats = nullptr) const;

    // Offset C for the backward oracle at this (y, center): audit-grid max of
    // the uncentered log ratio, refined by local ascent, negated.
    double calibrate_rhk_offset(const Point& y, const Point& proposal_center,
                                StepStats* stats = nullptr) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Convenience single-call forms of the individual oracles and the chain
// driver.  Each builds a ProximalSampler internally; loops should construct
// the sampler once instead.
Point mbi_series_rejection(const Point& x, const SamplerConfig& cfg, CounterRng& rng,
                           StepStats* stats = nullptr);
Point mbi_geodesic_random_walk(const Point& x, double eta, int substeps, CounterRng& rng);
Point rhk_find_mode(const TargetSpec& target, const Point& y, const SamplerConfig& cfg,
                    ModeFindReport* report = nullptr);
Point rhk_truncated_rejection(const TargetSpec& target, const Point& y, const SamplerConfig& cfg,
                              CounterRng& rng, StepStats* stats = nullptr);
Point rhk_varadhan_rejection(const TargetSpec& target, const Point& y, const SamplerConfig& cfg,
                             CounterRng& rng, StepStats* stats = nullptr);
Point proximal_step(const TargetSpec& target, const Point& x, const SamplerConfig& cfg,
                    CounterRng& rng, StepStats* stats = nullptr);
ChainTrace run_chain(const TargetSpec& target, const Point& init, int n_iters,
                     const SamplerConfig& cfg, CounterRng rng);

} // namespace rps
