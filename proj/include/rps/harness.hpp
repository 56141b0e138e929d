#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rps/baselines.hpp"
#include "rps/diagnostics.hpp"
#include "rps/proximal.hpp"

namespace rps {

// The four runnable experiments:
//   VmfSphere  — von Mises-Fisher target on Sphere(d), Frechet-variance decay
//   SpdQuartic — quartic-in-distance target on Spd(m), boundedness / divergence
//   CircleKl   — exp(kappa cos) target on the circle, grid-KL decay over replicas
//   KernelTable — truncated heat-kernel table with tail bounds (no sampling)
enum class ExperimentKind { VmfSphere, SpdQuartic, CircleKl, KernelTable };

enum class Algorithm { Proximal, Lmc };

// Initial state of each chain: the target mode, a draw from the exact
// distribution oracle (von Mises-Fisher targets only), or a uniform draw
// (compact manifolds only).
enum class InitRule { Mode, Oracle, Uniform };

// Flat key = value experiment description.  Every key has a default, every
// key is written back by serialize(), and parse(serialize(cfg)) == cfg.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::VmfSphere;
    Algorithm algorithm = Algorithm::Proximal;

    // Manifold selection: Sphere(d) for VmfSphere (d = 1 means the circle in
    // KernelTable), Spd(m) for SpdQuartic.
    int d = 2;
    int m = 3;

    // Target parameters: exp(kappa <mu,x>) on spheres, exp(kappa cos) on the
    // circle, exp(-d(X,I)^4 / (2 sigma^2)) on SPD.
    double kappa = 10.0;
    std::vector<double> mu = {10.0, 0.1, 2.0};
    double sigma = 0.03;

    // Sampler settings (0 / -1 mean "resolve automatically"; the resolved
    // step for VmfSphere is the one-proposal theory step at this epsilon).
    double eta = 0.0;
    double epsilon = 1e-3;
    MbiOracle mbi_oracle = MbiOracle::RGaussianVaradhan;
    RhkOracle rhk_oracle = RhkOracle::VaradhanRejection;
    ProposalCenter center = ProposalCenter::Y;
    double proposal_t = 0.0;
    int level = -1;
    double zeta = 1e-10;
    int grw_substeps = 10;
    bool clip = true;
    std::int64_t rejection_cap = 1000000;
    InitRule init = InitRule::Oracle;
    double init_radius = 0.0; // > 0: start at this geodesic distance from the reference

    // Langevin baseline settings (algorithm = lmc).
    double lmc_step = 1e-3;
    LmcSchedule lmc_schedule = LmcSchedule::Constant;
    double divergence_threshold = 1e3;

    // Run shape.
    int chains = 2000;
    int iters = 30;
    int bins = 64; // circle histogram resolution (CircleKl)

    // Kernel-table settings.
    double t = 0.5;
    std::vector<int> levels = {5, 10, 20, 40};
    int grid_points = 41;

    std::uint64_t seed = 7;
    int threads = 0; // 0 = hardware concurrency
    std::string out = "results.csv";

    bool operator==(const ExperimentConfig&) const = default;

    // The experiments shipped with the harness, at desk scale.
    static ExperimentConfig preset_vmf_s2();
    static ExperimentConfig preset_vmf_s5();
    static ExperimentConfig preset_spd();
    static ExperimentConfig preset_circle();
    static ExperimentConfig preset_kernel_table();
};

// Parse a flat config file body ('#' comments, blank lines, key = value).
// Unknown keys and malformed values raise ConfigError naming the key.
ExperimentConfig parse_config(const std::string& text);

// Write every key back in a fixed order; doubles use %.17g so a round trip
// is exact.
std::string serialize_config(const ExperimentConfig& cfg);

// Cross-field checks (mu length d+1, positive counts, rules valid for the
// manifold, ...); raises ConfigError naming the offending key.
void validate_config(const ExperimentConfig& cfg);

// One long-format output row.
struct CsvRow {
    long iter = 0;
    std::string metric;
    double value = 0.0;
    double se = 0.0;
    std::string flag = "ok";
};

// One kernel-table row: kernel value at inner product c (angle on the
// circle) with the series truncated at level l, plus the uniform tail bound.
struct KernelTableRow {
    int d = 2;
    double t = 0.0;
    int level = 0;
    double c = 0.0;
    double value = 0.0;
    double tail_bound = 0.0;
};

struct RunResult {
    std::vector<CsvRow> rows;          // sampling experiments
    std::vector<KernelTableRow> table; // kernel-table experiment
    long flagged_chains = 0;
    double wall_ms = 0.0;
};

// Resolved pieces of a sampling experiment, shared by the runner and the
// acceptance checks.
TargetSpec experiment_target(const ExperimentConfig& cfg);
Point experiment_reference(const ExperimentConfig& cfg);   // mode / identity
SamplerConfig experiment_sampler_config(const ExperimentConfig& cfg);
Point experiment_init(const ExperimentConfig& cfg, CounterRng& chain_rng);

// Run the configured experiment.  Chains are distributed over a worker pool
// and identified by index, so the result is independent of scheduling; chain
// j draws from stream j of the seed.  Chains that fail numerically are
// flagged, excluded from the aggregates, and counted into the `flag` column
// (`n_flagged=<k>`); wall time is reported in the result only, never in the
// CSV, so identical runs produce identical files.
RunResult run_experiment(const ExperimentConfig& cfg);

std::string format_csv(const RunResult& result);

// Write text to path atomically (temp file in the same directory + rename).
void write_file_atomic(const std::string& path, const std::string& text);

KernelTableRow kernel_table_row(int d, double t, int level, double c);

} // namespace rps
