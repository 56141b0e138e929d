#include "rps/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "rps/quadrature.hpp"

namespace rps {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;

} // namespace

GridDensity GridDensity::from_samples(const std::vector<double>& angles, int bins) {
    if (bins < 1)
        throw std::invalid_argument("GridDensity::from_samples: need at least one bin");
    if (angles.empty())
        throw std::invalid_argument("GridDensity::from_samples: no samples");
    GridDensity g;
    g.bins = bins;
    g.probs.assign(bins, 0.0);
    const double w = kTwoPi / bins;
    for (double a : angles) {
        int idx = static_cast<int>(wrap_angle_02pi(a) / w);
        if (idx >= bins) // angle numerically equal to 2*pi
            idx = bins - 1;
        g.probs[idx] += 1.0;
    }
    for (double& p : g.probs)
        p /= static_cast<double>(angles.size());
    return g;
}

GridDensity GridDensity::from_function(const std::function<double(double)>& unnorm, int bins,
                                       int subpanels) {
    if (bins < 1)
        throw std::invalid_argument("GridDensity::from_function: need at least one bin");
    if (subpanels < 1)
        throw std::invalid_argument("GridDensity::from_function: need at least one subpanel");
    GridDensity g;
    g.bins = bins;
    g.probs.assign(bins, 0.0);
    const double w = kTwoPi / bins;
    double total = 0.0;
    for (int i = 0; i < bins; ++i) {
        const double a = i * w;
        const double mass = trapezoid(a, a + w, subpanels, unnorm);
        if (!(mass >= 0.0))
            throw std::invalid_argument("GridDensity::from_function: density must be nonnegative");
        g.probs[i] = mass;
        total += mass;
    }
    if (!(total > 0.0))
        throw std::invalid_argument("GridDensity::from_function: density integrates to zero");
    for (double& p : g.probs)
        p /= total;
    return g;
}

GridDensity GridDensity::coarsen(int factor) const {
    if (factor < 1 || bins % factor != 0)
        throw std::invalid_argument("GridDensity::coarsen: bin count not divisible by factor");
    GridDensity g;
    g.bins = bins / factor;
    g.probs.assign(g.bins, 0.0);
    for (int i = 0; i < bins; ++i)
        g.probs[i / factor] += probs[i];
    return g;
}

KlResult kl_grid(const GridDensity& p, const GridDensity& q) {
    if (p.bins != q.bins)
        throw std::invalid_argument("kl_grid: grids have different bin counts");
    KlResult out;
    for (int i = 0; i < p.bins; ++i) {
        const double pi_ = p.probs[i];
        if (pi_ <= 0.0)
            continue; // 0 log 0 = 0
        if (q.probs[i] <= 0.0) {
            out.infinite = true;
            continue;
        }
        out.nats += pi_ * std::log(pi_ / q.probs[i]);
    }
    return out;
}

KlResult kl_grid(const GridDensity& p, const std::function<double(double)>& target_unnorm) {
    return kl_grid(p, GridDensity::from_function(target_unnorm, p.bins));
}

double tv_grid(const GridDensity& p, const GridDensity& q) {
    if (p.bins != q.bins)
        throw std::invalid_argument("tv_grid: grids have different bin counts");
    double acc = 0.0;
    for (int i = 0; i < p.bins; ++i)
        acc += std::abs(p.probs[i] - q.probs[i]);
    return 0.5 * acc;
}

double frechet_variance(const std::vector<Point>& xs, const Point& ref) {
    if (xs.empty())
        throw std::invalid_argument("frechet_variance: no points");
    double acc = 0.0;
    for (const Point& x : xs) {
        const double d = distance(x, ref);
        acc += d * d;
    }
    return acc / static_cast<double>(xs.size());
}

MeanStderr mean_and_stderr(const std::vector<double>& values) {
    if (values.empty())
        throw std::invalid_argument("mean_and_stderr: no values");
    MeanStderr out;
    for (double v : values)
        out.mean += v;
    out.mean /= static_cast<double>(values.size());
    if (values.size() == 1)
        return out;
    double ss = 0.0;
    for (double v : values)
        ss += (v - out.mean) * (v - out.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    out.se = std::sqrt(var / static_cast<double>(values.size()));
    return out;
}

Point vmf_oracle_sample(const Point& mode, double kappa_eff, CounterRng& rng) {
    if (mode.manifold().kind() != ManifoldKind::Sphere)
        throw std::invalid_argument("vmf_oracle_sample: mode must lie on a sphere");
    if (!(kappa_eff >= 0.0) || !std::isfinite(kappa_eff))
        throw std::invalid_argument("vmf_oracle_sample: kappa_eff must be nonnegative and finite");
    const int d = mode.manifold().sphere_d();
    const Eigen::VectorXd mu = mode.vec();
    // Envelope rejection for w = <mode, x>, density prop. to
    // e^{kappa w} (1-w^2)^{(d-2)/2}; with the ambient convention p = d+1 the
    // Beta envelope parameter is (p-1)/2 = d/2 and the acceptance rate is
    // bounded below uniformly in kappa_eff.
    const double p_minus_1 = static_cast<double>(d);
    const double b = p_minus_1 / (2.0 * kappa_eff + std::sqrt(4.0 * kappa_eff * kappa_eff + p_minus_1 * p_minus_1));
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa_eff * x0 + p_minus_1 * std::log(1.0 - x0 * x0);
    double w = 0.0;
    for (;;) {
        const double z = rng.beta(0.5 * p_minus_1, 0.5 * p_minus_1);
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        const double u = rng.uniform_pos();
        if (kappa_eff * w + p_minus_1 * std::log(1.0 - x0 * w) - c >= std::log(u))
            break;
    }
    // uniform direction in the tangent hyperplane of the mode
    Eigen::VectorXd z(mu.size());
    double vn = 0.0;
    do {
        for (int i = 0; i < z.size(); ++i)
            z(i) = rng.normal();
        z -= mu.dot(z) * mu;
        vn = z.norm();
    } while (vn < 1e-12);
    z /= vn;
    Eigen::VectorXd x = w * mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * z;
    x.normalize();
    return Point::sphere(x);
}

double expected_distsq_quadrature(const Manifold& man,
                                  const std::function<double(double)>& log_radial_density) {
    if (man.kind() == ManifoldKind::Spd)
        throw std::invalid_argument("expected_distsq_quadrature: defined for the circle and spheres only");
    const int vol_pow = (man.kind() == ManifoldKind::Circle) ? 0 : man.sphere_d() - 1;

    auto value_at = [&](int nodes) {
        const GaussLegendre gl(nodes);
        // offset by the max log density over the nodes so the exponentials
        // stay in range; the offset cancels in the ratio
        double lmax = -std::numeric_limits<double>::infinity();
        for (double u : gl.nodes) {
            const double r = 0.5 * kPi * (u + 1.0);
            lmax = std::max(lmax, log_radial_density(r));
        }
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double r = 0.5 * kPi * (gl.nodes[i] + 1.0);
            double w = std::exp(log_radial_density(r) - lmax);
            if (vol_pow > 0)
                w *= std::pow(std::sin(r), vol_pow);
            num += gl.weights[i] * w * r * r;
            den += gl.weights[i] * w;
        }
        if (!(den > 0.0))
            throw NumericError("expected_distsq_quadrature: density integrated to zero");
        return num / den;
    };

    double prev = value_at(64);
    for (int nodes = 128; nodes <= 16384; nodes *= 2) {
        const double cur = value_at(nodes);
        if (std::abs(cur - prev) <= 1e-10 * std::max(1.0, std::abs(cur)))
            return cur;
        prev = cur;
    }
    throw NumericError("expected_distsq_quadrature: node doubling did not converge");
}

} // namespace rps
