#include "rps/riemannian_gaussian.hpp"

#include <cmath>

#include "rps/heat_kernel.hpp"
#include "rps/quadrature.hpp"

namespace rps {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// log(sinh(u)/u), stable near 0.
double log_sinhc(double u) {
    if (u < 1e-8)
        return u * u / 6.0;
    if (u > 30.0) // sinh(u) ~ e^u / 2
        return u - std::log(2.0 * u);
    return std::log(std::sinh(u) / u);
}

} // namespace

RGaussian::RGaussian(const Point& center, double t) : center_(center), t_(t) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("RGaussian: t must be positive and finite");
}

double RGaussian::log_density_unnorm(const Point& x) const {
    const double r = distance(center_, x);
    return -r * r / (2.0 * t_);
}

double RGaussian::normalizer(int nodes) const {
    if (nodes < 8)
        throw std::invalid_argument("RGaussian::normalizer: too few quadrature nodes");
    const GaussLegendre gl(nodes);
    switch (center_.manifold().kind()) {
    case ManifoldKind::Circle:
        return gl.integrate(-kPi, kPi, [&](double r) { return std::exp(-r * r / (2.0 * t_)); });
    case ManifoldKind::Sphere: {
        const int d = center_.manifold().sphere_d();
        const double shell = sphere_area(d - 1);
        return shell * gl.integrate(0.0, kPi, [&](double r) {
            return std::exp(-r * r / (2.0 * t_)) * std::pow(std::sin(r), d - 1);
        });
    }
    case ManifoldKind::Spd:
        throw std::invalid_argument("RGaussian::normalizer: unavailable on the SPD manifold");
    }
    throw std::logic_error("RGaussian::normalizer: unreachable");
}

Point RGaussian::sample(CounterRng& rng, long rejection_cap, RejectionCounters* counters) const {
    if (rejection_cap < 1)
        throw std::invalid_argument("RGaussian::sample: rejection_cap must be >= 1");
    const Manifold& man = center_.manifold();

    double t_prop = t_;
    Eigen::MatrixXd center_inv_sqrt; // SPD only
    if (man.kind() == ManifoldKind::Spd) {
        const int m = man.spd_m();
        if (!(t_ < 12.0 / m))
            throw std::invalid_argument("RGaussian::sample: SPD sampler needs t < 12/m (variance inflation must stay positive)");
        t_prop = 1.0 / (1.0 / t_ - m / 12.0);
        center_inv_sqrt = spd_matrix_inv_sqrt(center_.value());
    }

    long proposals = 0;
    while (proposals < rejection_cap) {
        ++proposals;
        if (counters)
            ++counters->proposals;
        const TangentVector v = sample_tangent_gaussian(center_, t_prop, rng);

        switch (man.kind()) {
        case ManifoldKind::Circle: {
            const double r = v.value()(0, 0);
            if (std::abs(r) >= kPi)
                break; // outside the injectivity chart, reject
            if (counters)
                ++counters->accepts;
            return exp_map(center_, v);
        }
        case ManifoldKind::Sphere: {
            const double r = norm(v);
            if (r >= kPi)
                break;
            const int d = man.sphere_d();
            const double acc = (r < 1e-12) ? 1.0 : std::pow(std::sin(r) / r, d - 1);
            if (rng.uniform() < acc) {
                if (counters)
                    ++counters->accepts;
                return exp_map(center_, v);
            }
            break;
        }
        case ManifoldKind::Spd: {
            const int m = man.spd_m();
            // normal-coordinate representative of v at the center
            const Eigen::MatrixXd s =
                0.5 * (center_inv_sqrt * v.value() * center_inv_sqrt +
                       (center_inv_sqrt * v.value() * center_inv_sqrt).transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
            if (es.info() != Eigen::Success)
                throw NumericError("RGaussian::sample: eigendecomposition failed");
            const Eigen::VectorXd lam = es.eigenvalues();
            const double r2 = lam.squaredNorm();
            double log_acc = -m * r2 / 24.0;
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j < m; ++j)
                    log_acc += log_sinhc(0.5 * std::abs(lam(i) - lam(j)));
            if (log_acc > 1e-12)
                throw NumericError("RGaussian::sample: SPD acceptance exceeded 1 (log_acc = " +
                                   std::to_string(log_acc) + ")");
            if (std::log(rng.uniform_pos()) < log_acc) {
                if (counters)
                    ++counters->accepts;
                return exp_map(center_, v);
            }
            break;
        }
        }
    }
    const double rate = 0.0; // no accept happened in this call
    throw RejectionCapError("RGaussian::sample: no acceptance within " + std::to_string(rejection_cap) +
                                " proposals (t = " + std::to_string(t_) + ")",
                            proposals, rate);
}

} // namespace rps
