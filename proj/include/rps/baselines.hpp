#pragma once

#include "rps/proximal.hpp"

namespace rps {

enum class LmcSchedule { Constant, Decreasing };

struct LmcConfig {
    double step = 1e-3;                  // constant step, or c for the c/k schedule
    LmcSchedule schedule = LmcSchedule::Constant;
    double divergence_threshold = 1e3;   // distance to the reference that halts a chain
};

// One unadjusted Langevin step: x' = exp_x(-step * grad f(x) + sqrt(2 step) * xi)
// with xi a standard tangent Gaussian.
Point rlmc_step(const TargetSpec& target, const Point& x, double step, CounterRng& rng);

// Chain of Langevin steps with the configured schedule (step_k = c/k for the
// decreasing variant, k starting at 1).  A chain whose distance to the
// reference point (default: the initial point) exceeds the divergence
// threshold, or that hits a numerical failure, is halted with a flagged
// trace; the last state is repeated so trace lengths stay n_iters + 1.
ChainTrace rlmc_run(const TargetSpec& target, const Point& init, int n_iters,
                    const LmcConfig& cfg, CounterRng rng, const Point* reference = nullptr);

} // namespace rps
