#pragma once

#include "rps/manifold.hpp"

namespace rps {

// Surface area of the unit d-sphere, A_{S^d} = 2 pi^{(d+1)/2} / Gamma((d+1)/2),
// computed in log space.
double sphere_area(int d);

// Wrapped-Gaussian heat kernel on S^1 at time t and angular difference phi
// (wrapped internally to (-pi, pi]): sum over n in [-n_max, n_max] of
// (2 pi t)^{-1/2} exp(-(phi + 2 pi n)^2 / (2 t)).
double circle_heat_kernel(double t, double phi, int n_max);

// Derivative of the wrapped sum with respect to phi.
double circle_heat_kernel_dphi(double t, double phi, int n_max);

// Wrap count large enough that the omitted images contribute < zeta.
int circle_wrap_count(double t, double zeta);

// Truncated heat-kernel series on Sphere(d), d >= 2, as a function of the
// inner product c = <x, y>:
//   nu_l(c) = sum_{k=0}^{l} e^{-k(k+d-1)t/2} (2k+d-1) / ((d-1) A_{S^d})
//             * C_k^{(d-1)/2}(c)
// with C_k the Gegenbauer polynomials (three-term recurrence).  The truncated
// value can be negative for small l; consumers that need logs clamp.
double sphere_heat_kernel(int d, double t, double c, int level);

// Derivative of the truncated series with respect to c, via
// d/dc C_k^a = 2a C_{k-1}^{a+1}.
double sphere_heat_kernel_dc(int d, double t, double c, int level);

// Uniform tail bound on |nu - nu_l| over all c, from the coefficient bound
// M_k (two Gamma-ratio terms, evaluated in log space).  Non-increasing in
// level; the internal summation cutoff adapts until the next term is below
// 1e-18 of the running total.
double truncation_tail_bound(int d, double t, int level);

// Smallest level whose tail bound is <= zeta; throws TruncationError if no
// level up to the documented cap (4096) qualifies.
int choose_truncation(int d, double t, double zeta);

// Varadhan small-time approximation log nu(t, x, y) ~= -d(x, y)^2 / (2 t);
// valid on any of the supported manifolds.
double varadhan_log_kernel(const Point& x, const Point& y, double t);

// A heat-kernel evaluator bound to a manifold, time, and truncation level
// (series level on spheres, wrap count on the circle).  Series kernels exist
// for the circle and spheres only.
struct HeatKernel {
    Manifold man;
    double t;
    int level;

    static HeatKernel create(const Manifold& man, double t, int level);

    // Level picked via choose_truncation / circle_wrap_count at accuracy zeta.
    static HeatKernel with_accuracy(const Manifold& man, double t, double zeta);

    // Kernel value at geodesic distance r.
    double radial_density(double r) const;

    double density(const Point& x, const Point& y) const;

    // log of the kernel value with the value clamped below at 1e-300;
    // clamp events are counted into *clamp_events when provided.
    double log_density(const Point& x, const Point& y, long* clamp_events = nullptr) const;
    double radial_log_density(double r, long* clamp_events = nullptr) const;

    // Gradient of log nu(t, x, y) with respect to x (kernel value clamped as
    // in log_density before dividing).
    TangentVector grad_log_x(const Point& x, const Point& y, long* clamp_events = nullptr) const;
};

} // namespace rps
