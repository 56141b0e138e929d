#include "rps/heat_kernel.hpp"

#include <cmath>
#include <string>

namespace rps {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kLogFloor = 1e-300; // clamp for log-domain use of series values
constexpr int kLevelCap = 4096;      // documented search cap for choose_truncation

void check_sphere_args(int d, double t, const char* who) {
    if (d < 2)
        throw std::invalid_argument(std::string(who) + ": series kernel needs d >= 2");
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument(std::string(who) + ": t must be positive and finite");
}

// log of the series coefficient prefactor 1 / ((d-1) A_{S^d}).
double log_coeff_base(int d) {
    return -std::log(static_cast<double>(d - 1)) - (std::log(2.0) + 0.5 * (d + 1) * std::log(kPi) - std::lgamma(0.5 * (d + 1)));
}

} // namespace

double sphere_area(int d) {
    if (d < 1)
        throw std::invalid_argument("sphere_area: need d >= 1");
    return std::exp(std::log(2.0) + 0.5 * (d + 1) * std::log(kPi) - std::lgamma(0.5 * (d + 1)));
}

double circle_heat_kernel(double t, double phi, int n_max) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("circle_heat_kernel: t must be positive and finite");
    if (n_max < 0)
        throw std::invalid_argument("circle_heat_kernel: n_max must be >= 0");
    const double p = wrap_angle_pi(phi);
    const double norm = 1.0 / std::sqrt(2.0 * kPi * t);
    double acc = 0.0;
    for (int n = -n_max; n <= n_max; ++n) {
        const double u = p + 2.0 * kPi * n;
        acc += std::exp(-u * u / (2.0 * t));
    }
    return norm * acc;
}

double circle_heat_kernel_dphi(double t, double phi, int n_max) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("circle_heat_kernel_dphi: t must be positive and finite");
    if (n_max < 0)
        throw std::invalid_argument("circle_heat_kernel_dphi: n_max must be >= 0");
    const double p = wrap_angle_pi(phi);
    const double norm = 1.0 / std::sqrt(2.0 * kPi * t);
    double acc = 0.0;
    for (int n = -n_max; n <= n_max; ++n) {
        const double u = p + 2.0 * kPi * n;
        acc += -(u / t) * std::exp(-u * u / (2.0 * t));
    }
    return norm * acc;
}

int circle_wrap_count(double t, double zeta) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("circle_wrap_count: t must be positive and finite");
    if (!(zeta > 0.0))
        throw std::invalid_argument("circle_wrap_count: zeta must be positive");
    const double norm = 1.0 / std::sqrt(2.0 * kPi * t);
    // First omitted image pair sits at distance >= (2n+1)pi - pi = (2n-1)pi
    // ... conservatively use |2 pi (n+1) - pi|; stop once a geometric bound on
    // the omitted mass falls below zeta.
    for (int n = 1; n <= 1000; ++n) {
        const double u = 2.0 * kPi * (n + 1) - kPi;
        const double lead = 2.0 * norm * std::exp(-u * u / (2.0 * t));
        if (lead * 2.0 < zeta) // factor 2 dominates the geometric remainder
            return std::max(n, 3);
    }
    throw TruncationError("circle_wrap_count: no wrap count up to 1000 meets the tolerance");
}

double sphere_heat_kernel(int d, double t, double c, int level) {
    check_sphere_args(d, t, "sphere_heat_kernel");
    if (level < 0)
        throw std::invalid_argument("sphere_heat_kernel: level must be >= 0");
    if (!(std::abs(c) <= 1.0 + 1e-12))
        throw std::invalid_argument("sphere_heat_kernel: inner product must lie in [-1, 1]");
    const double cc = std::clamp(c, -1.0, 1.0);
    const double alpha = 0.5 * (d - 1);
    const double base = std::exp(log_coeff_base(d));
    double ck_prev = 0.0; // C_{k-1}
    double ck = 1.0;      // C_0
    double acc = 0.0;
    for (int k = 0; k <= level; ++k) {
        if (k >= 1) {
            double next;
            if (k == 1)
                next = 2.0 * alpha * cc;
            else
                next = (2.0 * (k + alpha - 1.0) * cc * ck - (k + 2.0 * alpha - 2.0) * ck_prev) / k;
            ck_prev = ck;
            ck = next;
        }
        const double w = std::exp(-0.5 * k * (k + d - 1.0) * t) * (2.0 * k + d - 1.0) * base;
        acc += w * ck;
    }
    return acc;
}

double sphere_heat_kernel_dc(int d, double t, double c, int level) {
    check_sphere_args(d, t, "sphere_heat_kernel_dc");
    if (level < 0)
        throw std::invalid_argument("sphere_heat_kernel_dc: level must be >= 0");
    if (!(std::abs(c) <= 1.0 + 1e-12))
        throw std::invalid_argument("sphere_heat_kernel_dc: inner product must lie in [-1, 1]");
    const double cc = std::clamp(c, -1.0, 1.0);
    const double alpha = 0.5 * (d - 1);
    const double ap = alpha + 1.0; // order of the derivative-side Gegenbauer family
    const double base = std::exp(log_coeff_base(d));
    // d/dc C_k^alpha = 2 alpha C_{k-1}^{alpha+1}; run the alpha+1 recurrence.
    double gk_prev = 0.0; // C_{j-1}^{alpha+1}
    double gk = 1.0;      // C_0^{alpha+1}
    double acc = 0.0;
    for (int k = 1; k <= level; ++k) {
        const int j = k - 1;
        if (j >= 1) {
            double next;
            if (j == 1)
                next = 2.0 * ap * cc;
            else
                next = (2.0 * (j + ap - 1.0) * cc * gk - (j + 2.0 * ap - 2.0) * gk_prev) / j;
            gk_prev = gk;
            gk = next;
        }
        const double w = std::exp(-0.5 * k * (k + d - 1.0) * t) * (2.0 * k + d - 1.0) * base;
        acc += w * 2.0 * alpha * gk;
    }
    return acc;
}

double truncation_tail_bound(int d, double t, int level) {
    check_sphere_args(d, t, "truncation_tail_bound");
    if (level < 0)
        throw std::invalid_argument("truncation_tail_bound: level must be >= 0");
    const double base = log_coeff_base(d);
    const double lg_half = std::lgamma(0.5 * (d - 1));
    const double lg_full = std::lgamma(static_cast<double>(d - 1));
    double bound = 0.0;
    for (int k = level + 1; k <= level + 200000; ++k) {
        // sup_c |C_k^{(d-1)/2}(c)| <= M_k with the two Gamma-ratio pieces kept
        // in log space to dodge overflow.
        const double log_a = std::lgamma(0.5 * (k + d - 1.0)) - lg_half - std::lgamma(0.5 * k + 1.0);
        const double log_b = std::lgamma(static_cast<double>(k + d - 1)) - lg_full - std::lgamma(static_cast<double>(k + 1));
        const double m_k = std::exp(log_a) * (1.0 + std::abs(std::exp(log_b - log_a) - 1.0));
        const double term = std::exp(-0.5 * k * (k + d - 1.0) * t + std::log(2.0 * k + d - 1.0) + base) * m_k;
        bound += term;
        if (k > level + 1 && term < 1e-18 * bound)
            break;
    }
    return bound;
}

int choose_truncation(int d, double t, double zeta) {
    check_sphere_args(d, t, "choose_truncation");
    if (!(zeta > 0.0))
        throw std::invalid_argument("choose_truncation: zeta must be positive");
    for (int l = 0; l <= kLevelCap; ++l) {
        if (truncation_tail_bound(d, t, l) <= zeta)
            return l;
    }
    throw TruncationError("choose_truncation: no level up to " + std::to_string(kLevelCap) +
                          " meets zeta=" + std::to_string(zeta) + " at t=" + std::to_string(t));
}

double varadhan_log_kernel(const Point& x, const Point& y, double t) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("varadhan_log_kernel: t must be positive and finite");
    const double r = distance(x, y);
    return -r * r / (2.0 * t);
}

// ---------------------------------------------------------------------------
// HeatKernel
// ---------------------------------------------------------------------------

HeatKernel HeatKernel::create(const Manifold& man, double t, int level) {
    if (man.kind() == ManifoldKind::Spd)
        throw std::invalid_argument("HeatKernel: no closed series on the SPD manifold; use varadhan_log_kernel");
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("HeatKernel: t must be positive and finite");
    if (level < 0)
        throw std::invalid_argument("HeatKernel: level must be >= 0");
    return HeatKernel{man, t, level};
}

HeatKernel HeatKernel::with_accuracy(const Manifold& man, double t, double zeta) {
    if (man.kind() == ManifoldKind::Circle)
        return create(man, t, circle_wrap_count(t, zeta));
    if (man.kind() == ManifoldKind::Sphere)
        return create(man, t, choose_truncation(man.sphere_d(), t, zeta));
    throw std::invalid_argument("HeatKernel: no closed series on the SPD manifold; use varadhan_log_kernel");
}

double HeatKernel::radial_density(double r) const {
    if (man.kind() == ManifoldKind::Circle)
        return circle_heat_kernel(t, r, level);
    return sphere_heat_kernel(man.sphere_d(), t, std::cos(r), level);
}

double HeatKernel::density(const Point& x, const Point& y) const {
    if (x.manifold() != man || y.manifold() != man)
        throw std::invalid_argument("HeatKernel::density: wrong manifold");
    if (man.kind() == ManifoldKind::Circle)
        return circle_heat_kernel(t, y.angle() - x.angle(), level);
    const double c = std::clamp(x.value().col(0).dot(y.value().col(0)), -1.0, 1.0);
    return sphere_heat_kernel(man.sphere_d(), t, c, level);
}

double HeatKernel::log_density(const Point& x, const Point& y, long* clamp_events) const {
    double v = density(x, y);
    if (v < kLogFloor) {
        if (clamp_events)
            ++*clamp_events;
        v = kLogFloor;
    }
    return std::log(v);
}

double HeatKernel::radial_log_density(double r, long* clamp_events) const {
    double v = radial_density(r);
    if (v < kLogFloor) {
        if (clamp_events)
            ++*clamp_events;
        v = kLogFloor;
    }
    return std::log(v);
}

TangentVector HeatKernel::grad_log_x(const Point& x, const Point& y, long* clamp_events) const {
    if (x.manifold() != man || y.manifold() != man)
        throw std::invalid_argument("HeatKernel::grad_log_x: wrong manifold");
    if (man.kind() == ManifoldKind::Circle) {
        const double phi = wrap_angle_pi(y.angle() - x.angle());
        double v = circle_heat_kernel(t, phi, level);
        if (v < kLogFloor) {
            if (clamp_events)
                ++*clamp_events;
            v = kLogFloor;
        }
        // d/d(theta_x) log nu(theta_y - theta_x) = -nu'(phi)/nu(phi)
        Eigen::MatrixXd g(1, 1);
        g(0, 0) = -circle_heat_kernel_dphi(t, phi, level) / v;
        return riemannian_grad(g, x);
    }
    const int d = man.sphere_d();
    const double c = std::clamp(x.value().col(0).dot(y.value().col(0)), -1.0, 1.0);
    double v = sphere_heat_kernel(d, t, c, level);
    if (v < kLogFloor) {
        if (clamp_events)
            ++*clamp_events;
        v = kLogFloor;
    }
    const double dldc = sphere_heat_kernel_dc(d, t, c, level) / v;
    // grad_x c = y - c x (tangent projection of y)
    Eigen::MatrixXd g = dldc * y.value();
    return riemannian_grad(g, x);
}

} // namespace rps
