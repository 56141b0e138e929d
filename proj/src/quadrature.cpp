#include "rps/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace rps {

GaussLegendre::GaussLegendre(int n) {
    if (n < 1)
        throw std::invalid_argument("GaussLegendre: need at least one node");
    nodes.resize(n);
    weights.resize(n);
    const double pi = 3.14159265358979323846264338327950288;
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

double GaussLegendre::integrate(double a, double b, const std::function<double(double)>& f) const {
    const double mid = 0.5 * (a + b);
    const double hl = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        acc += weights[i] * f(mid + hl * nodes[i]);
    return acc * hl;
}

double trapezoid(double a, double b, int n, const std::function<double(double)>& f) {
    if (n < 1)
        throw std::invalid_argument("trapezoid: need at least one panel");
    const double h = (b - a) / n;
    double acc = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i)
        acc += f(a + i * h);
    return acc * h;
}

} // namespace rps
