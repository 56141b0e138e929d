#include "rps/baselines.hpp"

#include <cmath>

namespace rps {

Point rlmc_step(const TargetSpec& target, const Point& x, double step, CounterRng& rng) {
    if (!(step > 0.0) || !std::isfinite(step))
        throw std::invalid_argument("rlmc_step: step must be positive and finite");
    const TangentVector drift = riemannian_grad(target.euclidean_grad(x), x) * (-step);
    const TangentVector noise = sample_tangent_gaussian(x, 2.0 * step, rng);
    return exp_map(x, drift + noise);
}

ChainTrace rlmc_run(const TargetSpec& target, const Point& init, int n_iters,
                    const LmcConfig& cfg, CounterRng rng, const Point* reference) {
    if (n_iters < 0)
        throw std::invalid_argument("rlmc_run: n_iters must be >= 0");
    if (!(cfg.step > 0.0) || !std::isfinite(cfg.step))
        throw std::invalid_argument("rlmc_run: step must be positive and finite");
    if (!(cfg.divergence_threshold > 0.0))
        throw std::invalid_argument("rlmc_run: divergence threshold must be positive");
    if (init.manifold() != target.man)
        throw std::invalid_argument("rlmc_run: init on the wrong manifold");
    const Point ref = reference ? *reference : init;

    ChainTrace trace;
    trace.states.reserve(n_iters + 1);
    trace.step_stats.reserve(n_iters);
    trace.states.push_back(init);
    auto pad_out = [&]() {
        while (static_cast<int>(trace.states.size()) < n_iters + 1) {
            trace.states.push_back(trace.states.back());
            trace.step_stats.push_back(StepStats{});
        }
    };
    for (int k = 1; k <= n_iters; ++k) {
        const double step = cfg.schedule == LmcSchedule::Decreasing ? cfg.step / k : cfg.step;
        try {
            const Point next = rlmc_step(target, trace.states.back(), step, rng);
            const double d = distance(next, ref);
            if (!std::isfinite(d) || d > cfg.divergence_threshold) {
                trace.states.push_back(next);
                trace.step_stats.push_back(StepStats{});
                trace.flagged = true;
                trace.flag_reason = "divergence: distance to reference exceeded threshold";
                pad_out();
                break;
            }
            trace.states.push_back(next);
            trace.step_stats.push_back(StepStats{});
        } catch (const std::exception& e) {
            // Numerical blow-up inside the step (e.g. overflowing matrix
            // exponentials on SPD) is reported as a flagged chain, not a crash.
            trace.flagged = true;
            trace.flag_reason = std::string("step failure: ") + e.what();
            pad_out();
            break;
        }
    }
    return trace;
}

} // namespace rps
