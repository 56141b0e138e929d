// Grid densities, divergences, Frechet statistics, and the exact directional
// oracle used as reference in the sphere experiments.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rps/diagnostics.hpp"
#include "support/oracles.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

using namespace rps;
namespace tt = rps::testing;
namespace golden = rps::testing::golden;

TEST_CASE("histograms land samples in the right wrapped bins") {
    const std::vector<double> angles = {0.01, 2.0 * M_PI - 0.01, M_PI, M_PI + 1e-9};
    const GridDensity g = GridDensity::from_samples(angles, 4);
    CHECK(g.bins == 4);
    CHECK(g.probs[0] == doctest::Approx(0.25)); // 0.01
    CHECK(g.probs[2] == doctest::Approx(0.5));  // the two near-pi samples
    CHECK(g.probs[3] == doctest::Approx(0.25)); // 2 pi - 0.01
    double total = 0.0;
    for (double p : g.probs) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("function binning normalizes and matches closed forms") {
    const GridDensity flat = GridDensity::from_function([](double) { return 3.7; }, 8);
    for (double p : flat.probs) CHECK(p == doctest::Approx(0.125).epsilon(1e-13));

    // cos^2 has twice the average mass near 0 and pi.
    const GridDensity cs = GridDensity::from_function(
        [](double a) { return std::cos(a) * std::cos(a); }, 4, 64);
    CHECK(cs.probs[0] == doctest::Approx(cs.probs[2]).epsilon(1e-10));
    CHECK(cs.probs[1] == doctest::Approx(cs.probs[3]).epsilon(1e-10));
}

TEST_CASE("coarsening sums adjacent bins") {
    GridDensity g;
    g.bins = 4;
    g.probs = {0.1, 0.2, 0.3, 0.4};
    const GridDensity c = g.coarsen(2);
    CHECK(c.bins == 2);
    CHECK(c.probs[0] == doctest::Approx(0.3));
    CHECK(c.probs[1] == doctest::Approx(0.7));
    CHECK_THROWS_AS(g.coarsen(3), std::invalid_argument);
}

TEST_CASE("KL basics: zero on equality, positive otherwise, infinite off-support") {
    GridDensity p;
    p.bins = 2;
    p.probs = {0.5, 0.5};
    GridDensity q;
    q.bins = 2;
    q.probs = {0.9, 0.1};
    CHECK(kl_grid(p, p).nats == doctest::Approx(0.0));
    CHECK(kl_grid(p, q).nats > 0.0);
    CHECK_FALSE(kl_grid(p, q).infinite);

    GridDensity z;
    z.bins = 2;
    z.probs = {1.0, 0.0};
    CHECK(kl_grid(p, z).infinite);
    // 0 log 0 on the p side is fine.
    CHECK_FALSE(kl_grid(z, p).infinite);
    CHECK(kl_grid(z, p).nats == doctest::Approx(std::log(2.0)));
}

TEST_CASE("KL against the cosine target reproduces the frozen 64-bin value") {
    const auto cosine = [](double a) { return std::exp(2.0 * std::cos(a)); };
    const GridDensity uniform = GridDensity::from_function([](double) { return 1.0; }, 64);
    // Enough subpanels that the per-bin quadrature converges to the exact
    // bin masses behind the frozen value.
    const KlResult kl = kl_grid(uniform, GridDensity::from_function(cosine, 64, 4096));
    CHECK_FALSE(kl.infinite);
    CHECK(kl.nats == doctest::Approx(golden::kKlUniformVsCos2Bins64).epsilon(1e-6));
    // The convenience overload (default subpanels) agrees to its quadrature error.
    CHECK(kl_grid(uniform, cosine).nats ==
          doctest::Approx(golden::kKlUniformVsCos2Bins64).epsilon(1e-4));
}

TEST_CASE("KL never increases under bin coarsening") {
    const GridDensity p = GridDensity::from_function(
        [](double a) { return std::exp(std::sin(a) + 0.3 * std::cos(2 * a)); }, 64);
    const GridDensity q = GridDensity::from_function(
        [](double a) { return std::exp(1.5 * std::cos(a)); }, 64);
    const double fine = kl_grid(p, q).nats;
    const double coarse = kl_grid(p.coarsen(4), q.coarsen(4)).nats;
    CHECK(coarse <= fine + 1e-12);
}

TEST_CASE("total variation is a bounded metric obeying Pinsker") {
    const GridDensity p = GridDensity::from_function(
        [](double a) { return std::exp(std::cos(a)); }, 32);
    const GridDensity q = GridDensity::from_function(
        [](double a) { return std::exp(-0.7 * std::cos(a)); }, 32);
    const GridDensity r = GridDensity::from_function(
        [](double a) { return 1.0 + 0.5 * std::sin(a); }, 32);
    const double tpq = tv_grid(p, q);
    CHECK(tpq > 0.0);
    CHECK(tpq <= 1.0);
    CHECK(tv_grid(p, p) == doctest::Approx(0.0));
    CHECK(tpq == doctest::Approx(tv_grid(q, p)));
    CHECK(tv_grid(p, r) <= tv_grid(p, q) + tv_grid(q, r) + 1e-14);
    CHECK(tpq * tpq <= kl_grid(p, q).nats / 2.0 + 1e-14);
}

TEST_CASE("Frechet variance for hand-picked circle points") {
    const std::vector<Point> pts = {Point::circle(0.0), Point::circle(M_PI / 2.0)};
    CHECK(frechet_variance(pts, Point::circle(0.0)) ==
          doctest::Approx(M_PI * M_PI / 8.0).epsilon(1e-14));
}

TEST_CASE("uniform circle samples approach Frechet variance pi^2/3") {
    CounterRng rng(17);
    std::vector<Point> pts;
    const int n = 40000;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) pts.push_back(Point::circle(rng.uniform(0.0, 2.0 * M_PI)));
    // Var(d^2) for d ~ U(0, pi) of d^2: E d^4 - (E d^2)^2 = pi^4/5 - pi^4/9.
    const double se = std::sqrt((std::pow(M_PI, 4) * (1.0 / 5.0 - 1.0 / 9.0)) / n);
    CHECK(std::abs(frechet_variance(pts, Point::circle(1.3)) - M_PI * M_PI / 3.0) < 4.0 * se);
}

TEST_CASE("mean_and_stderr on a known list") {
    const MeanStderr ms = mean_and_stderr({1.0, 2.0, 3.0, 4.0});
    CHECK(ms.mean == doctest::Approx(2.5));
    // Sample variance 5/3, SE = sqrt(5/12).
    CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 12.0)).epsilon(1e-12));
}

TEST_CASE("directional oracle matches the quadrature law of its cosine") {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(3);
    m(2) = 1.0;
    const Point mode = Point::sphere(m);
    const double kappa = 5.0;
    CounterRng rng(23);
    const int n = 20000;
    double cos_sum = 0.0;
    double distsq_sum = 0.0;
    double distsq_sumsq = 0.0;
    Eigen::Vector2d orth_sum = Eigen::Vector2d::Zero();
    for (int i = 0; i < n; ++i) {
        const Point x = vmf_oracle_sample(mode, kappa, rng);
        cos_sum += x.vec()(2);
        const double d = distance(mode, x);
        distsq_sum += d * d;
        distsq_sumsq += d * d * d * d;
        orth_sum += x.vec().head<2>();
    }
    // E[cos] = coth(kappa) - 1/kappa on S^2.
    const double expect_cos = 1.0 / std::tanh(kappa) - 1.0 / kappa;
    CHECK(std::abs(cos_sum / n - expect_cos) < 4.0 / std::sqrt(static_cast<double>(n)));
    // E[d^2] against the independent Simpson truth.
    const double truth = tt::vmf_distsq_truth(2, kappa);
    const double mean = distsq_sum / n;
    const double se = std::sqrt((distsq_sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - truth) < 4.0 * se);
    // The azimuthal component is symmetric about zero.
    CHECK(orth_sum.norm() / n < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("radial quadrature reproduces frozen moments") {
    // Riemannian Gaussian on S^2 at t = 0.3.
    const double rg = expected_distsq_quadrature(
        Manifold::sphere(2), [](double r) { return -r * r / 0.6; });
    CHECK(rg == doctest::Approx(golden::kDistSqRGaussS2T03).epsilon(1e-10));

    // vMF with the experiment's effective concentration on S^2 and S^5.
    const double v2 = expected_distsq_quadrature(
        Manifold::sphere(2),
        [](double r) { return golden::kVmfKappaEffS2 * std::cos(r); });
    CHECK(v2 == doctest::Approx(golden::kVmfDistSqS2).epsilon(1e-9));
    const double v5 = expected_distsq_quadrature(
        Manifold::sphere(5),
        [](double r) { return golden::kVmfKappaEffS5 * std::cos(r); });
    CHECK(v5 == doctest::Approx(golden::kVmfDistSqS5).epsilon(1e-9));

    // Circle target exp(2 cos r): Frechet variance about the mode.
    const double fv = expected_distsq_quadrature(
        Manifold::circle(), [](double r) { return 2.0 * std::cos(r); });
    CHECK(fv == doctest::Approx(golden::kFrechetVarCircleCos2).epsilon(1e-10));
}
