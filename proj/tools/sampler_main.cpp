// Command-line driver: `sampler run` executes a config-file experiment and
// writes its CSV, `sampler kernel-table` prints truncated heat-kernel values
// with tail bounds, `sampler selftest` runs fast end-to-end property checks.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rps/diagnostics.hpp"
#include "rps/harness.hpp"
#include "rps/heat_kernel.hpp"
#include "rps/quadrature.hpp"

namespace {

int cmd_run(const std::string& config_path, bool have_seed, std::uint64_t seed,
            const std::string& out_override) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open --config file '" << config_path << "'\n";
        return 2;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    rps::ExperimentConfig cfg = rps::parse_config(buffer.str());
    if (have_seed)
        cfg.seed = seed;
    if (!out_override.empty())
        cfg.out = out_override;

    const rps::RunResult result = rps::run_experiment(cfg);
    rps::write_file_atomic(cfg.out, rps::format_csv(result));

    std::printf("wall_ms=%.3f\n", result.wall_ms);
    if (result.flagged_chains > 0)
        std::printf("flagged_chains=%ld\n", result.flagged_chains);
    std::printf("wrote %s\n", cfg.out.c_str());
    return 0;
}

int cmd_kernel_table(int dim, double t, const std::vector<int>& levels, int grid_points) {
    rps::ExperimentConfig cfg = rps::ExperimentConfig::preset_kernel_table();
    cfg.d = dim;
    cfg.t = t;
    cfg.levels = levels;
    cfg.grid_points = grid_points;
    const rps::RunResult result = rps::run_experiment(cfg);
    std::fputs(rps::format_csv(result).c_str(), stdout);
    return 0;
}

// ---------------------------------------------------------------------------
// selftest: one fast check per subsystem, printed as [ok]/[FAIL] lines.

struct SelfTest {
    int failures = 0;

    void check(const std::string& name, const std::function<std::string()>& body) {
        std::string detail;
        try {
            detail = body(); // empty = pass, otherwise the failure message
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (detail.empty()) {
            std::printf("[ok]   %s\n", name.c_str());
        } else {
            std::printf("[FAIL] %s: %s\n", name.c_str(), detail.c_str());
            ++failures;
        }
    }
};

std::string expect(bool ok, const std::string& message) {
    return ok ? std::string() : message;
}

int cmd_selftest() {
    using namespace rps;
    SelfTest st;

    st.check("rng determinism and stream separation", [] {
        CounterRng a(123), b(123);
        for (int i = 0; i < 5; ++i)
            if (a.next_u64() != b.next_u64())
                return std::string("same seed produced different outputs");
        CounterRng s0 = CounterRng(123).stream(0);
        CounterRng s1 = CounterRng(123).stream(1);
        return expect(s0.next_u64() != s1.next_u64(), "streams 0 and 1 collide");
    });

    st.check("rng normal moments", [] {
        CounterRng rng(7);
        double sum = 0.0, sum2 = 0.0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const double x = rng.normal();
            sum += x;
            sum2 += x * x;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        return expect(std::abs(mean) < 0.03 && std::abs(var - 1.0) < 0.05,
                      "mean " + std::to_string(mean) + ", var " + std::to_string(var));
    });

    st.check("exp/log roundtrip on all manifolds", [] {
        CounterRng rng(11);
        const Point xs[] = {Point::circle(1.3),
                            Point::sphere(Eigen::Vector3d(0.6, -0.8, 0.0)),
                            Point::spd((Eigen::Matrix2d() << 2.0, 0.3, 0.3, 1.0).finished())};
        for (const Point& x : xs) {
            const TangentVector v = sample_tangent_gaussian(x, 0.25, rng);
            const Point y = exp_map(x, v);
            const TangentVector back = log_map(x, y);
            const double err = (back.value() - v.value()).norm();
            if (err > 1e-9)
                return "roundtrip error " + std::to_string(err);
        }
        return std::string();
    });

    st.check("distance-squared gradient vs finite differences", [] {
        CounterRng rng(17);
        const Point x = Point::sphere(Eigen::Vector3d(0.0, 0.6, 0.8));
        const Point y = Point::sphere(Eigen::Vector3d(1.0, 0.0, 0.0));
        const TangentVector g = grad_dist_sq(x, y);
        const TangentVector dir = sample_tangent_gaussian(x, 1.0, rng);
        const double h = 1e-6;
        const double dplus = distance(exp_map(x, dir * h), y);
        const double dminus = distance(exp_map(x, dir * (-h)), y);
        const double fd = (dplus * dplus - dminus * dminus) / (2.0 * h);
        const double an = inner(g, dir);
        return expect(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)),
                      "fd " + std::to_string(fd) + " vs " + std::to_string(an));
    });

    st.check("circle kernel matches its Fourier dual", [] {
        const double t = 0.3, phi = 1.1;
        const double wrapped = circle_heat_kernel(t, phi, 40);
        double dual = 1.0;
        for (int k = 1; k <= 200; ++k)
            dual += 2.0 * std::exp(-0.5 * k * k * t) * std::cos(k * phi);
        dual /= 2.0 * M_PI;
        return expect(std::abs(wrapped - dual) < 1e-10,
                      "difference " + std::to_string(wrapped - dual));
    });

    st.check("sphere kernel normalization", [] {
        GaussLegendre gl(64);
        const double integral =
            2.0 * M_PI * gl.integrate(-1.0, 1.0, [](double c) {
                return sphere_heat_kernel(2, 0.5, c, 40);
            });
        return expect(std::abs(integral - 1.0) < 1e-6, "integral " + std::to_string(integral));
    });

    st.check("series tail bound dominates the measured gap", [] {
        const double bound20 = truncation_tail_bound(2, 0.2, 20);
        const double bound40 = truncation_tail_bound(2, 0.2, 40);
        if (!(bound40 <= bound20))
            return std::string("bound not monotone in the level");
        for (int i = 0; i <= 40; ++i) {
            const double c = -1.0 + 2.0 * i / 40.0;
            const double gap =
                std::abs(sphere_heat_kernel(2, 0.2, c, 20) - sphere_heat_kernel(2, 0.2, c, 40));
            if (gap > bound20 + 1e-15)
                return "gap " + std::to_string(gap) + " exceeds bound " + std::to_string(bound20);
        }
        return std::string();
    });

    st.check("Riemannian Gaussian second moment on the sphere", [] {
        const Point center = Point::sphere(Eigen::Vector3d(0.0, 0.0, 1.0));
        const double t = 0.3;
        RGaussian g{center, t};
        CounterRng rng(29);
        std::vector<double> d2;
        for (int i = 0; i < 4000; ++i) {
            const Point x = g.sample(rng);
            const double r = distance(center, x);
            d2.push_back(r * r);
        }
        const MeanStderr ms = mean_and_stderr(d2);
        const double truth = expected_distsq_quadrature(
            center.manifold(), [t](double r) { return -r * r / (2.0 * t); });
        return expect(std::abs(ms.mean - truth) < 4.0 * ms.se,
                      "sampled " + std::to_string(ms.mean) + " vs " + std::to_string(truth));
    });

    st.check("SPD Riemannian Gaussian draws stay finite", [] {
        const Point center = Point::spd(Eigen::MatrixXd::Identity(3, 3));
        RGaussian g{center, 0.1};
        CounterRng rng(31);
        double max_r = 0.0;
        for (int i = 0; i < 500; ++i)
            max_r = std::max(max_r, distance(center, g.sample(rng)));
        return expect(std::isfinite(max_r) && max_r < 10.0, "max radius " + std::to_string(max_r));
    });

    st.check("proximal chain preserves the uniform circle law", [] {
        SamplerConfig cfg;
        cfg.eta = 0.5;
        cfg.mbi = MbiOracle::SeriesRejection;
        cfg.rhk = RhkOracle::TruncatedKernelRejection;
        const TargetSpec target = TargetSpec::zero(Manifold::circle());
        ProximalSampler sampler(target, cfg);
        double c = 0.0, s = 0.0;
        const int n = 400;
        for (int j = 0; j < n; ++j) {
            CounterRng rng = CounterRng(37).stream(j);
            Point x = Point::circle(rng.uniform(0.0, 2.0 * M_PI));
            for (int k = 0; k < 3; ++k)
                x = sampler.step(x, rng);
            c += std::cos(x.angle());
            s += std::sin(x.angle());
        }
        c /= n;
        s /= n;
        const double limit = 4.0 / std::sqrt(2.0 * n);
        return expect(std::abs(c) < limit && std::abs(s) < limit,
                      "first moments " + std::to_string(c) + ", " + std::to_string(s));
    });

    st.check("one-proposal theory step keeps rejections small", [] {
        Eigen::VectorXd mu(3);
        mu << 10.0, 0.1, 2.0;
        const TargetSpec target = TargetSpec::vmf(mu, 10.0);
        SamplerConfig cfg;
        cfg.mbi = MbiOracle::RGaussianVaradhan;
        cfg.rhk = RhkOracle::VaradhanRejection;
        cfg.center = ProposalCenter::Y;
        cfg.eta = TheoryParams::varadhan_triple(target.lipschitz, 2, 1e-3).eta;
        ProximalSampler sampler(target, cfg);
        CounterRng rng(41);
        Point x = Point::sphere(mu / mu.norm());
        StepStats stats;
        for (int k = 0; k < 50; ++k)
            x = sampler.step(x, rng, &stats);
        const double rej_per_call =
            static_cast<double>(stats.rhk_proposals - stats.rhk_accepts) / 50.0;
        return expect(rej_per_call < 100.0,
                      "mean backward rejections " + std::to_string(rej_per_call));
    });

    st.check("config round-trips through serialize/parse", [] {
        const ExperimentConfig presets[] = {
            ExperimentConfig::preset_vmf_s2(), ExperimentConfig::preset_vmf_s5(),
            ExperimentConfig::preset_spd(), ExperimentConfig::preset_circle(),
            ExperimentConfig::preset_kernel_table()};
        for (const ExperimentConfig& cfg : presets)
            if (!(parse_config(serialize_config(cfg)) == cfg))
                return std::string("round trip changed the config");
        return std::string();
    });

    st.check("experiment reruns are byte-identical", [] {
        ExperimentConfig cfg = ExperimentConfig::preset_vmf_s2();
        cfg.chains = 4;
        cfg.iters = 2;
        const std::string a = format_csv(run_experiment(cfg));
        const std::string b = format_csv(run_experiment(cfg));
        return expect(a == b, "two runs differ");
    });

    if (st.failures == 0) {
        std::printf("selftest: all checks passed\n");
        return 0;
    }
    std::printf("selftest: %d check(s) failed\n", st.failures);
    return 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Riemannian proximal sampler: experiments, kernel tables, self checks"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_override;
    CLI::App* run = app.add_subcommand("run", "Run an experiment described by a config file");
    run->add_option("--config", config_path, "Config file (flat key = value lines)")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_override, "Override the output CSV path");

    int dim = 2;
    double t = 0.5;
    std::vector<int> levels;
    int grid_points = 41;
    CLI::App* kt = app.add_subcommand(
        "kernel-table", "Print truncated heat-kernel values and tail bounds as CSV");
    kt->add_option("--dim", dim, "Sphere dimension (1 = circle)")->required();
    kt->add_option("--t", t, "Diffusion time")->required();
    kt->add_option("--levels", levels, "Truncation levels")->required()->delimiter(',');
    kt->add_option("--grid-points", grid_points, "Points on the inner-product/angle grid");

    CLI::App* st = app.add_subcommand("selftest", "Run fast property checks of every subsystem");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // CLI misuse is a configuration error
    }

    try {
        if (run->parsed())
            return cmd_run(config_path, seed_opt->count() > 0, seed, out_override);
        if (kt->parsed())
            return cmd_kernel_table(dim, t, levels, grid_points);
        if (st->parsed())
            return cmd_selftest();
    } catch (const rps::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const rps::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
