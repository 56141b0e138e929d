#pragma once

#include <functional>
#include <vector>

namespace rps {

// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
// on the Legendre recurrence.  Deterministic; accurate to ~1e-15 for the
// node counts used here (<= 8192).
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n);

    // Integrate f over [a, b] by affine transport of the nodes.
    double integrate(double a, double b, const std::function<double(double)>& f) const;
};

// Composite trapezoid rule over [a, b] with n panels (n+1 evaluations).
double trapezoid(double a, double b, int n, const std::function<double(double)>& f);

} // namespace rps
