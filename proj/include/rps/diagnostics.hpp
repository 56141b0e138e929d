#pragma once

#include <functional>
#include <vector>

#include "rps/manifold.hpp"

namespace rps {

// Probability masses over a uniform angular grid on [0, 2*pi).
struct GridDensity {
    int bins = 0;
    std::vector<double> probs;

    static GridDensity from_samples(const std::vector<double>& angles, int bins);

    // Bin masses of an unnormalized density, each bin integrated by the
    // trapezoid rule with `subpanels` panels, then normalized.
    static GridDensity from_function(const std::function<double(double)>& unnorm, int bins,
                                     int subpanels = 16);

    // Aggregate adjacent bins (bins must be divisible by factor).
    GridDensity coarsen(int factor) const;
};

struct KlResult {
    double nats = 0.0;
    bool infinite = false; // some p-mass fell where q is zero
};

// KL(p || q) over matching grids, with 0 log 0 = 0.
KlResult kl_grid(const GridDensity& p, const GridDensity& q);
KlResult kl_grid(const GridDensity& p, const std::function<double(double)>& target_unnorm);

// Total variation distance (half L1) over matching grids.
double tv_grid(const GridDensity& p, const GridDensity& q);

// Mean squared geodesic distance to a reference point.
double frechet_variance(const std::vector<Point>& xs, const Point& ref);

struct MeanStderr {
    double mean = 0.0;
    double se = 0.0;
};

MeanStderr mean_and_stderr(const std::vector<double>& values);

// Exact von Mises-Fisher draw on the mode's sphere, density proportional to
// exp(kappa_eff * <mode, x>).  The cosine against the mode is sampled by the
// standard envelope rejection scheme whose acceptance rate is bounded below
// uniformly in kappa_eff; the orthogonal direction is uniform.
Point vmf_oracle_sample(const Point& mode, double kappa_eff, CounterRng& rng);

// E[d(center,.)^2] for a rotationally symmetric density on the circle or a
// sphere, given log rho(r); integrates rho against the volume element
// (sin r)^{d-1} on [0, pi] (plain dr on the circle) by Gauss-Legendre with
// node doubling until successive values agree to 1e-10 relative.
double expected_distsq_quadrature(const Manifold& man,
                                  const std::function<double(double)>& log_radial_density);

} // namespace rps
