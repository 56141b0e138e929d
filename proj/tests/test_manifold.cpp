// Geometry primitives on the circle, spheres, and SPD matrices: chart
// invariants, exp/log consistency, metric identities, and gradient checks.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rps/manifold.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

using namespace rps;

namespace {

// Deterministic random points for property checks.
Point random_point(const Manifold& man, CounterRng& rng) {
    switch (man.kind()) {
    case ManifoldKind::Circle:
        return Point::circle(rng.uniform(0.0, 2.0 * M_PI));
    case ManifoldKind::Sphere: {
        Eigen::VectorXd v(man.sphere_d() + 1);
        for (int i = 0; i < v.size(); ++i) v(i) = rng.normal();
        return Point::sphere(v / v.norm());
    }
    case ManifoldKind::Spd: {
        const int m = man.spd_m();
        Eigen::MatrixXd s(m, m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j <= i; ++j) {
                s(i, j) = 0.5 * rng.normal();
                s(j, i) = s(i, j);
            }
        }
        return Point::spd(sym_matrix_exp(s));
    }
    }
    throw std::logic_error("unreachable");
}

// Tangent vector with norm bounded away from the cut locus.
TangentVector random_tangent(const Point& x, CounterRng& rng, double max_norm) {
    TangentVector v = sample_tangent_gaussian(x, 1.0, rng);
    const double n = norm(v);
    if (n < 1e-12) return v;
    return v * (max_norm * rng.uniform_pos() / n);
}

const std::vector<Manifold> kManifolds = {Manifold::circle(), Manifold::sphere(2),
                                          Manifold::sphere(5), Manifold::spd(2),
                                          Manifold::spd(3)};

} // namespace

TEST_CASE("descriptors expose dimension and curvature floor") {
    CHECK(Manifold::circle().dim() == 1);
    CHECK(Manifold::sphere(5).dim() == 5);
    CHECK(Manifold::spd(3).dim() == 6);
    CHECK(Manifold::circle().ricci_lower_bound() == 0.0);
    CHECK(Manifold::sphere(2).ricci_lower_bound() == 1.0);
    CHECK(Manifold::spd(3).ricci_lower_bound() == doctest::Approx(-11.0 / 4.0));
    CHECK_THROWS_AS(Manifold::sphere(1), std::invalid_argument);
    CHECK_THROWS_AS(Manifold::spd(1), std::invalid_argument);
}

TEST_CASE("angle wrapping picks the canonical representatives") {
    CHECK(wrap_angle_02pi(-0.1) == doctest::Approx(2.0 * M_PI - 0.1));
    CHECK(wrap_angle_02pi(7.0) == doctest::Approx(7.0 - 2.0 * M_PI));
    CHECK(wrap_angle_pi(3.0 * M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle_pi(-M_PI + 0.2) == doctest::Approx(-M_PI + 0.2));
    CHECK(Point::circle(-0.25).angle() == doctest::Approx(2.0 * M_PI - 0.25));
}

TEST_CASE("point constructors validate their representations") {
    // Slightly off-unit vectors are renormalized, grossly off-unit rejected.
    Eigen::VectorXd v(3);
    v << 1.0 + 5e-11, 0.0, 0.0;
    CHECK(Point::sphere(v).vec().norm() == doctest::Approx(1.0).epsilon(1e-15));
    v << 1.1, 0.0, 0.0;
    CHECK_THROWS_AS(Point::sphere(v), std::invalid_argument);

    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.5, 0.4, 1.0; // asymmetric
    CHECK_THROWS_AS(Point::spd(a), std::invalid_argument);
    a << 1.0, 2.0, 2.0, 1.0; // symmetric but indefinite
    CHECK_THROWS_AS(Point::spd(a), std::invalid_argument);
}

TEST_CASE("tangent constructors validate tangency") {
    Eigen::VectorXd x(3);
    x << 0.0, 0.0, 1.0;
    const Point p = Point::sphere(x);
    Eigen::MatrixXd good(3, 1);
    good << 0.3, -0.2, 0.0;
    CHECK_NOTHROW(TangentVector(p, good));
    Eigen::MatrixXd bad(3, 1);
    bad << 0.3, -0.2, 0.5; // radial component
    CHECK_THROWS_AS(TangentVector(p, bad), std::invalid_argument);
}

TEST_CASE("hand-checked distances") {
    CHECK(distance(Point::circle(0.1), Point::circle(2.0 * M_PI - 0.1)) == doctest::Approx(0.2));
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd e2 = Eigen::VectorXd::Zero(3);
    e1(0) = 1.0;
    e2(1) = 1.0;
    CHECK(distance(Point::sphere(e1), Point::sphere(e2)) == doctest::Approx(M_PI / 2.0));
    CHECK(distance(Point::sphere(e1), Point::sphere(-e1)) == doctest::Approx(M_PI));
    // d(I, e^2 I) on Spd(2): log-eigenvalues (2, 2), distance 2*sqrt(2).
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    CHECK(distance(Point::spd(id), Point::spd(std::exp(2.0) * id)) ==
          doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("distance is a metric on random triples") {
    CounterRng rng(101);
    for (const Manifold& man : kManifolds) {
        for (int rep = 0; rep < 20; ++rep) {
            const Point x = random_point(man, rng);
            const Point y = random_point(man, rng);
            const Point z = random_point(man, rng);
            // Self-distance is eigensolver noise on SPD, exact elsewhere.
            CHECK(distance(x, x) < 1e-7);
            CHECK(distance(x, y) == doctest::Approx(distance(y, x)).epsilon(1e-12));
            CHECK(distance(x, z) <= distance(x, y) + distance(y, z) + 1e-12);
        }
    }
}

TEST_CASE("log(exp) round-trips within 1e-9") {
    CounterRng rng(202);
    for (const Manifold& man : kManifolds) {
        const double reach = (man.kind() == ManifoldKind::Spd) ? 3.0 : M_PI - 0.1;
        for (int rep = 0; rep < 50; ++rep) {
            const Point x = random_point(man, rng);
            const TangentVector v = random_tangent(x, rng, reach);
            const TangentVector w = log_map(x, exp_map(x, v));
            CHECK(norm(w + (-v)) / std::max(1.0, norm(v)) < 1e-9);
        }
    }
}

TEST_CASE("exp(log) round-trips within 1e-9") {
    CounterRng rng(303);
    for (const Manifold& man : kManifolds) {
        for (int rep = 0; rep < 50; ++rep) {
            const Point x = random_point(man, rng);
            const Point y = random_point(man, rng);
            if (man.kind() == ManifoldKind::Sphere && distance(x, y) > M_PI - 1e-3) continue;
            const Point z = exp_map(x, log_map(x, y));
            CHECK((z.value() - y.value()).norm() < 1e-9);
        }
    }
}

TEST_CASE("geodesics are unit-speed: d(x, exp_x(s v)) = s ||v||") {
    CounterRng rng(404);
    for (const Manifold& man : kManifolds) {
        const Point x = random_point(man, rng);
        const TangentVector v = random_tangent(x, rng, 1.0);
        for (double s : {0.1, 0.5, 1.5}) {
            CHECK(distance(x, exp_map(x, v * s)) == doctest::Approx(s * norm(v)).epsilon(1e-9));
        }
    }
}

TEST_CASE("log_map throws at the sphere cut locus") {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
    e1(0) = 1.0;
    CHECK_THROWS_AS(log_map(Point::sphere(e1), Point::sphere(-e1)), CutLocusError);
    // The circle chart resolves the antipode to the representative +pi.
    const TangentVector v = log_map(Point::circle(0.0), Point::circle(M_PI));
    CHECK(std::abs(v.value()(0, 0)) == doctest::Approx(M_PI));
}

TEST_CASE("SPD distance is invariant under congruence") {
    CounterRng rng(505);
    const Manifold man = Manifold::spd(3);
    for (int rep = 0; rep < 20; ++rep) {
        const Point x = random_point(man, rng);
        const Point y = random_point(man, rng);
        Eigen::MatrixXd a(3, 3);
        for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.normal();
        a += 4.0 * Eigen::MatrixXd::Identity(3, 3); // keep it comfortably invertible
        const auto conj = [&](const Point& p) {
            Eigen::MatrixXd q = a * p.value() * a.transpose();
            return Point::spd(0.5 * (q + q.transpose()));
        };
        CHECK(distance(conj(x), conj(y)) == doctest::Approx(distance(x, y)).epsilon(1e-9));
    }
}

TEST_CASE("sphere distance is invariant under rotations") {
    CounterRng rng(606);
    const Manifold man = Manifold::sphere(3);
    Eigen::MatrixXd g(4, 4);
    for (int i = 0; i < 16; ++i) g(i / 4, i % 4) = rng.normal();
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    for (int rep = 0; rep < 20; ++rep) {
        const Point x = random_point(man, rng);
        const Point y = random_point(man, rng);
        const Point qx = Point::sphere(q * x.vec());
        const Point qy = Point::sphere(q * y.vec());
        CHECK(distance(qx, qy) == doctest::Approx(distance(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("grad of squared distance matches finite differences") {
    CounterRng rng(707);
    for (const Manifold& man : kManifolds) {
        for (int rep = 0; rep < 10; ++rep) {
            const Point x = random_point(man, rng);
            Point y = random_point(man, rng);
            if (man.kind() != ManifoldKind::Spd && distance(x, y) > M_PI - 0.3) continue;
            if (distance(x, y) < 0.05) continue;
            const TangentVector g = grad_dist_sq(x, y);
            const TangentVector dir = random_tangent(x, rng, 1.0);
            const double dn = norm(dir);
            if (dn < 1e-8) continue;
            const TangentVector u = dir * (1.0 / dn);
            const double h = 1e-6;
            const double fp = std::pow(distance(exp_map(x, u * h), y), 2);
            const double fm = std::pow(distance(exp_map(x, u * (-h)), y), 2);
            const double fd = (fp - fm) / (2.0 * h);
            const double an = inner(g, u);
            CHECK(std::abs(fd - an) / std::max(1.0, std::abs(an)) < 1e-5);
        }
    }
}

TEST_CASE("riemannian_grad agrees with directional derivatives") {
    CounterRng rng(808);

    // Sphere: f(x) = <a, x>, Euclidean gradient a.
    {
        const Point x = random_point(Manifold::sphere(2), rng);
        Eigen::MatrixXd a(3, 1);
        a << 0.7, -1.2, 0.4;
        const TangentVector g = riemannian_grad(a, x);
        const TangentVector u = random_tangent(x, rng, 1.0) * (1.0 / 0.9);
        const double h = 1e-6;
        const auto f = [&](const Point& p) { return (a.transpose() * p.value())(0, 0); };
        const double fd = (f(exp_map(x, u * h)) - f(exp_map(x, u * (-h)))) / (2.0 * h);
        CHECK(std::abs(fd - inner(g, u)) / std::max(1.0, std::abs(fd)) < 1e-5);
    }

    // SPD: f(X) = tr(B X), Euclidean gradient B.
    {
        const Point x = random_point(Manifold::spd(2), rng);
        Eigen::MatrixXd b(2, 2);
        b << 1.0, 0.3, 0.3, -0.5;
        const TangentVector g = riemannian_grad(b, x);
        const TangentVector u = random_tangent(x, rng, 1.0);
        const double h = 1e-6;
        const auto f = [&](const Point& p) { return (b * p.value()).trace(); };
        const double fd = (f(exp_map(x, u * h)) - f(exp_map(x, u * (-h)))) / (2.0 * h);
        CHECK(std::abs(fd - inner(g, u)) / std::max(1.0, std::abs(fd)) < 1e-5);
    }

    // Circle: f(theta) = cos(theta), chart gradient -sin(theta).
    {
        const Point x = Point::circle(1.1);
        Eigen::MatrixXd g1(1, 1);
        g1(0, 0) = -std::sin(1.1);
        const TangentVector g = riemannian_grad(g1, x);
        CHECK(g.value()(0, 0) == doctest::Approx(-std::sin(1.1)));
    }
}

TEST_CASE("SPD inner product has the affine-invariant form") {
    Eigen::MatrixXd x(2, 2);
    x << 1.0, 0.0, 0.0, 4.0;
    const Point p = Point::spd(x);
    Eigen::MatrixXd u(2, 2);
    u << 0.0, 0.0, 0.0, 2.0;
    const TangentVector tu(p, u);
    // tr(X^-1 U X^-1 U) = (2/4)^2 = 0.25.
    CHECK(inner(tu, tu) == doctest::Approx(0.25));
    CHECK(norm(tu) == doctest::Approx(0.5));
}

TEST_CASE("tangent Gaussian has E||v||^2 = t * dim") {
    CounterRng rng(909);
    struct Case {
        Manifold man;
        double t;
    };
    const std::vector<Case> cases = {{Manifold::circle(), 0.4},
                                     {Manifold::sphere(2), 0.3},
                                     {Manifold::spd(3), 0.2}};
    for (const Case& c : cases) {
        const Point x = random_point(c.man, rng);
        const int n = 20000;
        double sum = 0.0;
        double sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            const TangentVector v = sample_tangent_gaussian(x, c.t, rng);
            const double nsq = inner(v, v);
            sum += nsq;
            sumsq += nsq * nsq;
        }
        const double mean = sum / n;
        const double var = std::max(0.0, sumsq / n - mean * mean);
        const double expect = c.t * c.man.dim();
        CHECK(std::abs(mean - expect) < 5.0 * std::sqrt(var / n) + 1e-12);
    }
}

TEST_CASE("spectral helpers invert each other") {
    CounterRng rng(111);
    const Point x = random_point(Manifold::spd(3), rng);
    const Eigen::MatrixXd r = spd_matrix_sqrt(x.value());
    CHECK((r * r - x.value()).norm() < 1e-12 * x.value().norm());
    const Eigen::MatrixXd ri = spd_matrix_inv_sqrt(x.value());
    CHECK((r * ri - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
    const Eigen::MatrixXd s = spd_matrix_log(x.value());
    CHECK((sym_matrix_exp(s) - x.value()).norm() < 1e-11 * x.value().norm());
}

TEST_CASE("indefinite matrices are rejected by the spectral helpers") {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.0, 0.0, -1e-6;
    CHECK_THROWS_AS(spd_matrix_log(a), NumericError);
    CHECK_THROWS_AS(spd_matrix_sqrt(a), NumericError);
    // An eigenvalue at the boundary of the cone (within the clamp allowance)
    // is floored rather than rejected, so the call returns.
    Eigen::MatrixXd b(2, 2);
    b << 1.0, 0.0, 0.0, 1e-20;
    CHECK(std::isfinite(spd_matrix_log(b)(0, 0)));
}
