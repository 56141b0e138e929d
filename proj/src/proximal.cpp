#include "rps/proximal.hpp"

#include <cmath>
#include <optional>

namespace rps {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Series oracles below this eta would need infeasible truncation levels on
// spheres (and lose precision to cancellation near the cut locus); the
// resolver degrades them to the Varadhan forms and counts the switch.
constexpr double kSeriesEtaFloor = 0.05;

// Fixed key for the deterministic point sets on spheres above S^2.
constexpr std::uint64_t kAuditKey = 0x6175646974677269ULL;

// Orthogonal matrix taking the pole e_{n-1} to the unit vector u.
Eigen::MatrixXd rotation_from_pole(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    p(n - 1) = 1.0;
    const double c = u(n - 1);
    if (c < -1.0 + 1e-12) {
        // antipodal pole: half-turn in the (e_0, pole) plane (fixed tie-break)
        Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
        r(0, 0) = -1.0;
        r(n - 1, n - 1) = -1.0;
        return r;
    }
    const Eigen::VectorXd w = p + u;
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
    r -= (w * w.transpose()) / (1.0 + c);
    r += 2.0 * u * p.transpose();
    return r;
}

// Pole-anchored lattice on Sphere(d): Fibonacci lattice for d = 2, a
// fixed-key counter-RNG point set otherwise.  Deterministic either way.
std::vector<Eigen::VectorXd> pole_lattice(int d, int n) {
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(n);
    if (d == 2) {
        const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < n; ++i) {
            const double z = 1.0 - (2.0 * i + 1.0) / n;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = golden_angle * i;
            Eigen::VectorXd u(3);
            u << rho * std::cos(a), rho * std::sin(a), z;
            u.normalize();
            pts.push_back(std::move(u));
        }
        return pts;
    }
    CounterRng rng(kAuditKey);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd u(d + 1);
        double nn = 0.0;
        do {
            for (int k = 0; k < u.size(); ++k)
                u(k) = rng.normal();
            nn = u.norm();
        } while (nn < 1e-12);
        u /= nn;
        pts.push_back(std::move(u));
    }
    return pts;
}

} // namespace

// ---------------------------------------------------------------------------
// TargetSpec factories
// ---------------------------------------------------------------------------

TargetSpec TargetSpec::zero(const Manifold& man) {
    TargetSpec t{man, {}, {}, 0.0, {}};
    t.f = [](const Point&) { return 0.0; };
    switch (man.kind()) {
    case ManifoldKind::Circle:
        t.euclidean_grad = [](const Point&) { return Eigen::MatrixXd::Zero(1, 1); };
        break;
    case ManifoldKind::Sphere: {
        const int n = man.sphere_d() + 1;
        t.euclidean_grad = [n](const Point&) { return Eigen::MatrixXd::Zero(n, 1); };
        break;
    }
    case ManifoldKind::Spd: {
        const int m = man.spd_m();
        t.euclidean_grad = [m](const Point&) { return Eigen::MatrixXd::Zero(m, m); };
        break;
    }
    }
    t.lipschitz = 0.0;
    t.description = "uniform (f = 0)";
    return t;
}

TargetSpec TargetSpec::vmf(const Eigen::VectorXd& mu, double kappa) {
    if (mu.size() < 3)
        throw std::invalid_argument("TargetSpec::vmf: mu must live in R^{d+1}, d >= 2");
    if (!(kappa >= 0.0) || !std::isfinite(kappa) || !mu.allFinite())
        throw std::invalid_argument("TargetSpec::vmf: invalid parameters");
    TargetSpec t{Manifold::sphere(static_cast<int>(mu.size()) - 1), {}, {}, 0.0, {}};
    const Eigen::VectorXd mu_copy = mu;
    t.f = [mu_copy, kappa](const Point& x) { return -kappa * mu_copy.dot(x.vec()); };
    t.euclidean_grad = [mu_copy, kappa](const Point&) -> Eigen::MatrixXd { return -kappa * mu_copy; };
    t.lipschitz = kappa * mu.norm();
    t.description = "von Mises-Fisher";
    return t;
}

TargetSpec TargetSpec::circle_cosine(double kappa) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
        throw std::invalid_argument("TargetSpec::circle_cosine: invalid kappa");
    TargetSpec t{Manifold::circle(), {}, {}, 0.0, {}};
    t.f = [kappa](const Point& x) { return -kappa * std::cos(x.angle()); };
    t.euclidean_grad = [kappa](const Point& x) -> Eigen::MatrixXd {
        Eigen::MatrixXd g(1, 1);
        g(0, 0) = kappa * std::sin(x.angle());
        return g;
    };
    t.lipschitz = kappa;
    t.description = "circle cosine tilt";
    return t;
}

TargetSpec TargetSpec::spd_quartic(int m, double sigma) {
    if (m < 2)
        throw std::invalid_argument("TargetSpec::spd_quartic: need m >= 2");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("TargetSpec::spd_quartic: sigma must be positive");
    TargetSpec t{Manifold::spd(m), {}, {}, 0.0, {}};
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const Point eye = Point::spd(Eigen::MatrixXd::Identity(m, m));
    t.f = [eye, inv2s2](const Point& x) {
        const double d = distance(x, eye);
        return d * d * d * d * inv2s2;
    };
    t.euclidean_grad = [eye, inv2s2](const Point& x) -> Eigen::MatrixXd {
        // Riemannian gradient of d^4/(2 sigma^2) is -(2 d^2 / sigma^2) log_x(I);
        // convert back to the Euclidean convention G = X^-1 (rgrad) X^-1 so the
        // generic riemannian_grad() round-trips it.
        const double d = distance(x, eye);
        const TangentVector lg = log_map(x, eye);
        const Eigen::MatrixXd rgrad = -(4.0 * inv2s2 * d * d) * lg.value();
        const Eigen::LLT<Eigen::MatrixXd> llt(x.value());
        const Eigen::MatrixXd tmp = llt.solve(rgrad);                     // X^-1 rgrad
        const Eigen::MatrixXd g = llt.solve(tmp.transpose()).transpose(); // X^-1 rgrad X^-1
        return 0.5 * (g + g.transpose());
    };
    t.lipschitz = 0.0; // quartic growth: no global Lipschitz constant
    t.description = "SPD quartic distance well";
    return t;
}

// ---------------------------------------------------------------------------
// TheoryParams
// ---------------------------------------------------------------------------

TheoryParams TheoryParams::varadhan_triple(double L1, int dim, double epsilon) {
    if (!(L1 > 0.0) || !std::isfinite(L1))
        throw std::invalid_argument("TheoryParams: L1 must be positive");
    if (dim < 2)
        throw std::invalid_argument("TheoryParams: need intrinsic dimension >= 2");
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("TheoryParams: epsilon must lie in (0, 1)");
    TheoryParams p;
    p.c_eps = 1.0 / std::log(1.0 / epsilon);
    const double l2 = L1 * L1;
    p.eta = p.c_eps / (l2 * dim);
    p.t = p.c_eps / (l2 * (dim - 1));
    p.total_time = p.c_eps / (l2 * (dim + 1));
    return p;
}

void StepStats::accumulate(const StepStats& o) {
    mbi_proposals += o.mbi_proposals;
    mbi_accepts += o.mbi_accepts;
    rhk_proposals += o.rhk_proposals;
    rhk_accepts += o.rhk_accepts;
    clamp_events += o.clamp_events;
    clip_events += o.clip_events;
    varadhan_fallbacks += o.varadhan_fallbacks;
    modefind_iters += o.modefind_iters;
}

// ---------------------------------------------------------------------------
// Audit grid
// ---------------------------------------------------------------------------

std::vector<Point> audit_grid(const Manifold& man, int n, const Point& center) {
    if (n < 1)
        throw std::invalid_argument("audit_grid: need n >= 1");
    if (center.manifold() != man)
        throw std::invalid_argument("audit_grid: center on the wrong manifold");
    std::vector<Point> out;
    out.reserve(n);
    switch (man.kind()) {
    case ManifoldKind::Circle: {
        for (int i = 0; i < n; ++i) {
            const double off = -kPi + 2.0 * kPi * (i + 0.5) / n;
            out.push_back(Point::circle(center.angle() + off));
        }
        return out;
    }
    case ManifoldKind::Sphere: {
        const auto lattice = pole_lattice(man.sphere_d(), n);
        const Eigen::MatrixXd rot = rotation_from_pole(center.vec());
        for (const auto& u : lattice) {
            Eigen::VectorXd z = rot * u;
            z.normalize();
            out.push_back(Point::sphere(z));
        }
        return out;
    }
    case ManifoldKind::Spd:
        throw std::invalid_argument("audit_grid: calibration grids exist on compact manifolds only");
    }
    throw std::logic_error("audit_grid: unreachable");
}

// ---------------------------------------------------------------------------
// ProximalSampler
// ---------------------------------------------------------------------------

struct ProximalSampler::Impl {
    TargetSpec target;
    SamplerConfig cfg; // level resolved in place
    Manifold man;

    MbiOracle mbi = MbiOracle::SeriesRejection;
    RhkOracle rhk = RhkOracle::TruncatedKernelRejection;
    bool degraded = false; // series -> Varadhan switch happened

    std::optional<HeatKernel> kernel; // present iff a series oracle is active
    double t_mbi = 0.0;               // forward proposal variance (series MBI)
    double t_rhk = 0.0;               // backward proposal variance
    double c_eps = 0.0;
    double l1_eff = 0.0;
    double c_mbi = 0.0;       // calibrated series-MBI offset
    double klog_origin = 0.0; // cached log kernel at distance 0

    // pole-anchored calibration lattice for compact manifolds
    std::vector<Eigen::VectorXd> lattice; // spheres
    std::vector<double> circle_offsets;   // circle
    std::vector<double> radii;
    std::vector<double> klog_at_radii; // cached series values (truncated RHK)

    Impl(TargetSpec t, SamplerConfig c) : target(std::move(t)), cfg(c), man(target.man) {
        if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta))
            throw std::invalid_argument("ProximalSampler: eta must be positive and finite");
        if (cfg.grw_substeps < 1)
            throw std::invalid_argument("ProximalSampler: grw_substeps must be >= 1");
        if (cfg.rejection_cap < 1)
            throw std::invalid_argument("ProximalSampler: rejection_cap must be >= 1");
        if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 1.0))
            throw std::invalid_argument("ProximalSampler: epsilon must lie in (0, 1)");
        if (cfg.calibration_grid < 16)
            throw std::invalid_argument("ProximalSampler: calibration_grid too small");
        if (!target.f || !target.euclidean_grad)
            throw std::invalid_argument("ProximalSampler: target needs f and euclidean_grad");

        l1_eff = cfg.lipschitz_override > 0.0 ? cfg.lipschitz_override : target.lipschitz;
        c_eps = 1.0 / std::log(1.0 / cfg.epsilon);
        mbi = cfg.mbi;
        rhk = cfg.rhk;

        if (man.kind() == ManifoldKind::Spd) {
            if (mbi == MbiOracle::SeriesRejection || rhk == RhkOracle::TruncatedKernelRejection)
                throw std::invalid_argument(
                    "ProximalSampler: series oracles need a closed heat-kernel series; "
                    "use the Varadhan oracles on the SPD manifold");
        }

        // Degenerate eta: the series kernels need infeasible levels below the
        // floor on spheres; degrade to the Varadhan forms and count it.
        if (man.kind() == ManifoldKind::Sphere && cfg.eta < kSeriesEtaFloor) {
            if (rhk == RhkOracle::TruncatedKernelRejection) {
                rhk = RhkOracle::VaradhanRejection;
                degraded = true;
            }
            if (mbi == MbiOracle::SeriesRejection) {
                mbi = MbiOracle::RGaussianVaradhan;
                degraded = true;
            }
        }

        const bool series_active =
            mbi == MbiOracle::SeriesRejection || rhk == RhkOracle::TruncatedKernelRejection;
        if (series_active) {
            if (cfg.level >= 0)
                kernel = HeatKernel::create(man, cfg.eta, cfg.level);
            else
                kernel = HeatKernel::with_accuracy(man, cfg.eta, cfg.zeta);
            cfg.level = kernel->level;
            klog_origin = kernel->radial_log_density(0.0);
        }

        // proposal variance rule: t = s * eta with s = d/(d-1) for the series
        // oracles (s = 2 on the circle); t = eta for the mode-centered
        // Varadhan oracle; the TheoryParams t for the y-centered form.
        const double s_rule =
            (man.kind() == ManifoldKind::Sphere)
                ? static_cast<double>(man.sphere_d()) / (man.sphere_d() - 1.0)
                : 2.0;
        t_mbi = cfg.proposal_t > 0.0 ? cfg.proposal_t : s_rule * cfg.eta;

        if (rhk == RhkOracle::TruncatedKernelRejection) {
            t_rhk = cfg.proposal_t > 0.0 ? cfg.proposal_t : s_rule * cfg.eta;
        } else if (cfg.center == ProposalCenter::Mode) {
            t_rhk = cfg.proposal_t > 0.0 ? cfg.proposal_t : cfg.eta;
        } else {
            if (cfg.proposal_t > 0.0) {
                t_rhk = cfg.proposal_t;
            } else {
                if (!(l1_eff > 0.0))
                    throw std::invalid_argument(
                        "ProximalSampler: y-centered Varadhan proposals need a Lipschitz "
                        "constant (TargetSpec.lipschitz or lipschitz_override) or an explicit proposal_t");
                t_rhk = TheoryParams::varadhan_triple(l1_eff, man.dim(), cfg.epsilon).t;
            }
        }

        const bool need_lattice =
            man.kind() != ManifoldKind::Spd &&
            (rhk == RhkOracle::TruncatedKernelRejection ||
             (rhk == RhkOracle::VaradhanRejection && cfg.center == ProposalCenter::Mode));
        if (need_lattice) {
            radii.reserve(cfg.calibration_grid);
            if (man.kind() == ManifoldKind::Circle) {
                circle_offsets.reserve(cfg.calibration_grid);
                for (int i = 0; i < cfg.calibration_grid; ++i) {
                    const double off = -kPi + 2.0 * kPi * (i + 0.5) / cfg.calibration_grid;
                    circle_offsets.push_back(off);
                    radii.push_back(std::abs(off));
                }
            } else {
                lattice = pole_lattice(man.sphere_d(), cfg.calibration_grid);
                for (const auto& u : lattice)
                    radii.push_back(std::acos(std::clamp(u(u.size() - 1), -1.0, 1.0)));
            }
            if (rhk == RhkOracle::TruncatedKernelRejection) {
                klog_at_radii.reserve(radii.size());
                for (double r : radii)
                    klog_at_radii.push_back(kernel->radial_log_density(r));
            }
        }

        if (mbi == MbiOracle::SeriesRejection)
            c_mbi = calibrate_mbi_offset();
    }

    // -- series-MBI offset ---------------------------------------------------

    double mbi_log_ratio_radial(double r) const {
        return kernel->radial_log_density(r) - klog_origin + r * r / (2.0 * t_mbi);
    }

    double mbi_log_ratio_slope(double r) const {
        double v = kernel->radial_density(r);
        v = std::max(v, 1e-300);
        double dv;
        if (man.kind() == ManifoldKind::Circle)
            dv = circle_heat_kernel_dphi(kernel->t, r, kernel->level);
        else
            dv = -std::sin(r) * sphere_heat_kernel_dc(man.sphere_d(), kernel->t, std::cos(r), kernel->level);
        return dv / v + r / t_mbi;
    }

    // The acceptance ratio of the series MBI is radial, so the "manifold
    // grid" scan reduces to its radial profile on [0, pi]; the local ascent
    // refinements run on the same profile.
    double calibrate_mbi_offset() const {
        const int n = cfg.calibration_grid;
        double best_r = 0.0, best_v = 0.0; // r = 0 gives log ratio exactly 0
        for (int i = 0; i < n; ++i) {
            const double r = kPi * static_cast<double>(i) / (n - 1);
            const double v = mbi_log_ratio_radial(r);
            if (v > best_v) {
                best_v = v;
                best_r = r;
            }
        }
        double r = best_r, fr = best_v;
        double step = kPi / (n - 1);
        for (int it = 0; it < cfg.calibration_refine; ++it) {
            const double g = mbi_log_ratio_slope(r);
            double s = step;
            bool moved = false;
            for (int bt = 0; bt < 20 && !moved; ++bt) {
                const double cand = std::clamp(r + s * (g > 0 ? 1.0 : -1.0), 0.0, kPi);
                const double fc = mbi_log_ratio_radial(cand);
                if (fc > fr) {
                    r = cand;
                    fr = fc;
                    moved = true;
                } else {
                    s *= 0.5;
                }
            }
            if (!moved)
                break;
        }
        return -std::max(fr, best_v);
    }

    // -- target potential and gradients --------------------------------------

    double g_value(const Point& x, const Point& y, StepStats* stats) const {
        if (rhk == RhkOracle::TruncatedKernelRejection) {
            long clamps = 0;
            const double lk = kernel->log_density(x, y, &clamps);
            if (stats)
                stats->clamp_events += clamps;
            return target.f(x) - lk;
        }
        const double r = distance(x, y);
        return target.f(x) + r * r / (2.0 * cfg.eta);
    }

    TangentVector g_grad(const Point& x, const Point& y, StepStats* stats) const {
        const TangentVector gf = riemannian_grad(target.euclidean_grad(x), x);
        if (rhk == RhkOracle::TruncatedKernelRejection) {
            long clamps = 0;
            const TangentVector gk = kernel->grad_log_x(x, y, &clamps);
            if (stats)
                stats->clamp_events += clamps;
            return gf + gk * (-1.0);
        }
        // grad of d(x,y)^2/(2 eta) = -log_x(y)/eta
        return gf + log_map(x, y) * (-1.0 / cfg.eta);
    }

    Point find_mode(const Point& y, ModeFindReport* report, StepStats* stats) const {
        Point x = y;
        double gx = g_value(x, y, stats);
        const double step0 = 1.0 / (1.0 / cfg.eta + std::max(l1_eff, 0.0));
        ModeFindReport rep;
        try {
            for (int it = 0; it < cfg.modefind_max_iters; ++it) {
                const TangentVector grad = g_grad(x, y, stats);
                const double gn = norm(grad);
                rep.grad_norm = gn;
                if (gn <= cfg.modefind_tol) {
                    rep.converged = true;
                    break;
                }
                double s = step0;
                bool moved = false;
                for (int bt = 0; bt < 60 && !moved; ++bt) {
                    const Point cand = exp_map(x, grad * (-s));
                    const double gc = g_value(cand, y, stats);
                    if (gc <= gx - 1e-4 * s * gn * gn) {
                        x = cand;
                        gx = gc;
                        moved = true;
                    } else {
                        s *= 0.5;
                    }
                }
                ++rep.iters;
                if (!moved)
                    break; // no admissible descent step at double precision
            }
        } catch (const CutLocusError&) {
            // gradient undefined at the cut locus; stop at the current point
        }
        if (stats)
            stats->modefind_iters += rep.iters;
        if (report)
            *report = rep;
        return x;
    }

    // -- backward oracle (RHK) -----------------------------------------------

    double log_accept_rhk(const Point& y, const Point& c0, double g_ref, double offset,
                          const Point& x, StepStats* stats) const {
        const double r = distance(x, c0);
        return -g_value(x, y, stats) + g_ref + offset + r * r / (2.0 * t_rhk);
    }

    double calibrate_rhk_offset(const Point& y, const Point& c0, StepStats* stats) const {
        if (man.kind() == ManifoldKind::Spd)
            return 0.0; // strong convexity of g makes the uncentered ratio <= 1 (t = eta)
        const double g_ref = g_value(c0, y, stats);

        // audit-grid scan anchored at y; the kernel term only depends on the
        // cached radii for the truncated oracle
        double best = 0.0;
        std::optional<Point> best_pt;
        const int n = cfg.calibration_grid;
        if (man.kind() == ManifoldKind::Circle) {
            for (int i = 0; i < n; ++i) {
                const Point z = Point::circle(y.angle() + circle_offsets[i]);
                const double kterm = (rhk == RhkOracle::TruncatedKernelRejection)
                                         ? klog_at_radii[i]
                                         : -radii[i] * radii[i] / (2.0 * cfg.eta);
                const double rz = distance(z, c0);
                const double h = -(target.f(z) - kterm) + g_ref + rz * rz / (2.0 * t_rhk);
                if (h > best) {
                    best = h;
                    best_pt = z;
                }
            }
        } else {
            const Eigen::MatrixXd rot = rotation_from_pole(y.vec());
            for (int i = 0; i < n; ++i) {
                Eigen::VectorXd zv = rot * lattice[i];
                zv.normalize();
                const Point z = Point::sphere(zv);
                const double kterm = (rhk == RhkOracle::TruncatedKernelRejection)
                                         ? klog_at_radii[i]
                                         : -radii[i] * radii[i] / (2.0 * cfg.eta);
                const double rz = distance(z, c0);
                const double h = -(target.f(z) - kterm) + g_ref + rz * rz / (2.0 * t_rhk);
                if (h > best) {
                    best = h;
                    best_pt = z;
                }
            }
        }

        // local ascent refinements from the best grid point
        if (best_pt) {
            Point z = *best_pt;
            double hz = best;
            double step = kPi / n;
            try {
                for (int it = 0; it < cfg.calibration_refine; ++it) {
                    const TangentVector ga = g_grad(z, y, stats) * (-1.0) +
                                             log_map(z, c0) * (-1.0 / t_rhk);
                    const double gn = norm(ga);
                    if (gn < 1e-14)
                        break;
                    double s = step;
                    bool moved = false;
                    for (int bt = 0; bt < 20 && !moved; ++bt) {
                        const Point cand = exp_map(z, ga * (s / gn));
                        const double hc = log_accept_rhk(y, c0, g_ref, 0.0, cand, stats);
                        if (hc > hz) {
                            z = cand;
                            hz = hc;
                            moved = true;
                        } else {
                            s *= 0.5;
                        }
                    }
                    if (!moved)
                        break;
                }
            } catch (const CutLocusError&) {
                // refinement walked into the cut locus; keep the best so far
            }
            best = std::max(best, hz);
        }
        return -best;
    }

    Point sample_rhk(const Point& y, CounterRng& rng, StepStats* stats) const {
        Point c0 = y;
        double offset = 0.0;
        if (rhk == RhkOracle::VaradhanRejection && cfg.center == ProposalCenter::Y) {
            offset = -0.5 * c_eps;
        } else {
            c0 = find_mode(y, nullptr, stats);
            offset = calibrate_rhk_offset(y, c0, stats);
        }
        const double g_ref = g_value(c0, y, stats);
        const RGaussian proposal(c0, t_rhk);
        for (long k = 0; k < cfg.rejection_cap; ++k) {
            const Point x = proposal.sample(rng, cfg.rejection_cap);
            if (stats)
                ++stats->rhk_proposals;
            const double lv = log_accept_rhk(y, c0, g_ref, offset, x, stats);
            if (lv > 1e-12 && stats)
                ++stats->clip_events;
            const double la = cfg.clip_acceptance ? std::min(0.0, lv) : lv;
            if (std::log(rng.uniform_pos()) < la) {
                if (stats)
                    ++stats->rhk_accepts;
                return x;
            }
        }
        throw RejectionCapError("ProximalSampler: backward oracle exhausted its proposal budget",
                                cfg.rejection_cap, 0.0);
    }

    // -- forward oracle (MBI) ------------------------------------------------

    Point sample_mbi(const Point& x, CounterRng& rng, StepStats* stats) const {
        switch (mbi) {
        case MbiOracle::GeodesicRandomWalk: {
            Point cur = x;
            const double h = cfg.eta / cfg.grw_substeps;
            for (int i = 0; i < cfg.grw_substeps; ++i)
                cur = exp_map(cur, sample_tangent_gaussian(cur, h, rng));
            if (stats) {
                ++stats->mbi_proposals;
                ++stats->mbi_accepts;
            }
            return cur;
        }
        case MbiOracle::RGaussianVaradhan: {
            const RGaussian prop(x, cfg.eta);
            RejectionCounters rc;
            const Point y = prop.sample(rng, cfg.rejection_cap, &rc);
            if (stats) {
                stats->mbi_proposals += rc.proposals;
                stats->mbi_accepts += rc.accepts;
            }
            return y;
        }
        case MbiOracle::SeriesRejection: {
            const RGaussian prop(x, t_mbi);
            for (long k = 0; k < cfg.rejection_cap; ++k) {
                const Point y = prop.sample(rng, cfg.rejection_cap);
                if (stats)
                    ++stats->mbi_proposals;
                long clamps = 0;
                const double r = distance(x, y);
                const double lv = kernel->radial_log_density(r, &clamps) - klog_origin + c_mbi +
                                  r * r / (2.0 * t_mbi);
                if (stats) {
                    stats->clamp_events += clamps;
                    if (lv > 1e-12)
                        ++stats->clip_events;
                }
                const double la = cfg.clip_acceptance ? std::min(0.0, lv) : lv;
                if (std::log(rng.uniform_pos()) < la) {
                    if (stats)
                        ++stats->mbi_accepts;
                    return y;
                }
            }
            throw RejectionCapError("ProximalSampler: forward oracle exhausted its proposal budget",
                                    cfg.rejection_cap, 0.0);
        }
        }
        throw std::logic_error("sample_mbi: unreachable");
    }

    Point step(const Point& x, CounterRng& rng, StepStats* stats) const {
        if (degraded && stats)
            ++stats->varadhan_fallbacks;
        const Point y = sample_mbi(x, rng, stats);
        return sample_rhk(y, rng, stats);
    }
};

ProximalSampler::ProximalSampler(TargetSpec target, SamplerConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(target), cfg)) {}

ProximalSampler::~ProximalSampler() = default;
ProximalSampler::ProximalSampler(ProximalSampler&&) noexcept = default;
ProximalSampler& ProximalSampler::operator=(ProximalSampler&&) noexcept = default;

const TargetSpec& ProximalSampler::target() const { return impl_->target; }
const SamplerConfig& ProximalSampler::config() const { return impl_->cfg; }
MbiOracle ProximalSampler::resolved_mbi() const { return impl_->mbi; }
RhkOracle ProximalSampler::resolved_rhk() const { return impl_->rhk; }
double ProximalSampler::mbi_offset() const { return impl_->c_mbi; }
double ProximalSampler::mbi_proposal_t() const { return impl_->t_mbi; }
double ProximalSampler::rhk_proposal_t() const { return impl_->t_rhk; }

Point ProximalSampler::sample_mbi(const Point& x, CounterRng& rng, StepStats* stats) const {
    return impl_->sample_mbi(x, rng, stats);
}

Point ProximalSampler::sample_rhk(const Point& y, CounterRng& rng, StepStats* stats) const {
    return impl_->sample_rhk(y, rng, stats);
}

Point ProximalSampler::find_mode(const Point& y, ModeFindReport* report) const {
    return impl_->find_mode(y, report, nullptr);
}

Point ProximalSampler::step(const Point& x, CounterRng& rng, StepStats* stats) const {
    return impl_->step(x, rng, stats);
}

double ProximalSampler::log_accept_mbi(const Point& x, const Point& y, StepStats* stats) const {
    if (impl_->mbi != MbiOracle::SeriesRejection)
        throw std::invalid_argument("log_accept_mbi: only defined for the series forward oracle");
    long clamps = 0;
    const double r = distance(x, y);
    const double lv = impl_->kernel->radial_log_density(r, &clamps) - impl_->klog_origin +
                      impl_->c_mbi + r * r / (2.0 * impl_->t_mbi);
    if (stats)
        stats->clamp_events += clamps;
    return lv;
}

double ProximalSampler::log_accept_rhk(const Point& y, const Point& proposal_center, double offset,
                                       const Point& x, StepStats* stats) const {
    const double g_ref = impl_->g_value(proposal_center, y, stats);
    return impl_->log_accept_rhk(y, proposal_center, g_ref, offset, x, stats);
}

double ProximalSampler::calibrate_rhk_offset(const Point& y, const Point& proposal_center,
                                             StepStats* stats) const {
    return impl_->calibrate_rhk_offset(y, proposal_center, stats);
}

ChainTrace ProximalSampler::run_chain(const Point& init, int n_iters, CounterRng rng) const {
    if (n_iters < 0)
        throw std::invalid_argument("run_chain: n_iters must be >= 0");
    if (init.manifold() != impl_->man)
        throw std::invalid_argument("run_chain: init on the wrong manifold");
    ChainTrace trace;
    trace.states.reserve(n_iters + 1);
    trace.step_stats.reserve(n_iters);
    trace.states.push_back(init);
    for (int k = 0; k < n_iters; ++k) {
        StepStats stats;
        try {
            const Point next = impl_->step(trace.states.back(), rng, &stats);
            trace.states.push_back(next);
            trace.step_stats.push_back(stats);
        } catch (const NumericError& e) {
            trace.flagged = true;
            trace.flag_reason = e.what();
            // keep the trace shape: repeat the last state for the remainder
            while (static_cast<int>(trace.states.size()) < n_iters + 1) {
                trace.states.push_back(trace.states.back());
                trace.step_stats.push_back(StepStats{});
            }
            break;
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Single-call convenience forms
// ---------------------------------------------------------------------------

Point mbi_series_rejection(const Point& x, const SamplerConfig& cfg, CounterRng& rng,
                           StepStats* stats) {
    SamplerConfig c = cfg;
    c.mbi = MbiOracle::SeriesRejection;
    ProximalSampler s(TargetSpec::zero(x.manifold()), c);
    return s.sample_mbi(x, rng, stats);
}

Point mbi_geodesic_random_walk(const Point& x, double eta, int substeps, CounterRng& rng) {
    SamplerConfig c;
    c.eta = eta;
    c.mbi = MbiOracle::GeodesicRandomWalk;
    c.rhk = RhkOracle::VaradhanRejection; // irrelevant; avoids series setup
    c.grw_substeps = substeps;
    ProximalSampler s(TargetSpec::zero(x.manifold()), c);
    return s.sample_mbi(x, rng, nullptr);
}

Point rhk_find_mode(const TargetSpec& target, const Point& y, const SamplerConfig& cfg,
                    ModeFindReport* report) {
    ProximalSampler s(target, cfg);
    return s.find_mode(y, report);
}

Point rhk_truncated_rejection(const TargetSpec& target, const Point& y, const SamplerConfig& cfg,
                              CounterRng& rng, StepStats* stats) {
    SamplerConfig c = cfg;
    c.rhk = RhkOracle::TruncatedKernelRejection;
    ProximalSampler s(target, c);
    return s.sample_rhk(y, rng, stats);
}

Point rhk_varadhan_rejection(const TargetSpec& target, const Point& y, const SamplerConfig& cfg,
                             CounterRng& rng, StepStats* stats) {
    SamplerConfig c = cfg;
    c.rhk = RhkOracle::VaradhanRejection;
    ProximalSampler s(target, c);
    return s.sample_rhk(y, rng, stats);
}

Point proximal_step(const TargetSpec& target, const Point& x, const SamplerConfig& cfg,
                    CounterRng& rng, StepStats* stats) {
    ProximalSampler s(target, cfg);
    return s.step(x, rng, stats);
}

ChainTrace run_chain(const TargetSpec& target, const Point& init, int n_iters,
                     const SamplerConfig& cfg, CounterRng rng) {
    ProximalSampler s(target, cfg);
    return s.run_chain(init, n_iters, std::move(rng));
}

} // namespace rps
