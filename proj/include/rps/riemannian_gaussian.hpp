#pragma once

#include "rps/manifold.hpp"

namespace rps {

struct RejectionCounters {
    long proposals = 0;
    long accepts = 0;
};

// Riemannian Gaussian mu(t, center, .) with unnormalized density
// exp(-d(center, x)^2 / (2 t)) against the Riemannian volume.
//
// Exact samplers:
//   Circle     — tangent normal N(0, t), rejected outside (-pi, pi).
//   Sphere(d)  — tangent Gaussian, hard-rejected at ||v|| >= pi, thinned with
//                probability (sin r / r)^{d-1} (the exp-map volume factor).
//   Spd(m)     — tangent Gaussian with inflated variance t' where
//                1/t' = 1/t - m/12 (requires t < 12/m), accepted with
//                probability prod_{i<j} (sinh(u_ij)/u_ij) * exp(-m r^2 / 24),
//                u_ij = |lambda_i - lambda_j| / 2 of the normal-coordinate
//                representative; the bound sinh(u)/u <= exp(u^2/6) together
//                with sum u_ij^2 <= m r^2 / 4 keeps the probability <= 1,
//                which is asserted on every draw.
class RGaussian {
public:
    RGaussian(const Point& center, double t);

    const Point& center() const { return center_; }
    double t() const { return t_; }

    // -d(center, x)^2 / (2 t)
    double log_density_unnorm(const Point& x) const;

    // Normalizing constant (circle and spheres, by Gauss-Legendre quadrature
    // over the radial coordinate); unavailable on SPD.
    double normalizer(int nodes = 512) const;

    // Exact draw; throws RejectionCapError after rejection_cap proposals.
    Point sample(CounterRng& rng, long rejection_cap = 1000000,
                 RejectionCounters* counters = nullptr) const;

private:
    Point center_;
    double t_;
};

} // namespace rps
