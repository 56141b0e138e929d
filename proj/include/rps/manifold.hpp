#pragma once

#include <Eigen/Dense>

#include "rps/errors.hpp"
#include "rps/rng.hpp"

namespace rps {

enum class ManifoldKind { Circle, Sphere, Spd };

// Descriptor for the three supported geometries:
//   Circle     — S^1 with angle coordinates in [0, 2*pi); distances use the
//                representative of the difference in (-pi, pi].
//   Sphere(d)  — unit sphere S^d embedded in R^{d+1}, d >= 2.
//   Spd(m)     — symmetric positive-definite m x m matrices with the
//                affine-invariant metric g_X(U, V) = tr(X^-1 U X^-1 V).
class Manifold {
public:
    static Manifold circle() { return Manifold(ManifoldKind::Circle, 1); }

    static Manifold sphere(int d) {
        if (d < 2)
            throw std::invalid_argument("Manifold::sphere: need d >= 2 (use circle() for S^1)");
        return Manifold(ManifoldKind::Sphere, d);
    }

    static Manifold spd(int m) {
        if (m < 2)
            throw std::invalid_argument("Manifold::spd: need m >= 2");
        return Manifold(ManifoldKind::Spd, m);
    }

    ManifoldKind kind() const { return kind_; }

    // Intrinsic dimension: 1, d, or m(m+1)/2.
    int dim() const {
        switch (kind_) {
        case ManifoldKind::Circle: return 1;
        case ManifoldKind::Sphere: return size_;
        case ManifoldKind::Spd:    return size_ * (size_ + 1) / 2;
        }
        return 0;
    }

    // d for Sphere(d).
    int sphere_d() const {
        if (kind_ != ManifoldKind::Sphere)
            throw std::invalid_argument("Manifold::sphere_d: not a sphere");
        return size_;
    }

    // m for Spd(m).
    int spd_m() const {
        if (kind_ != ManifoldKind::Spd)
            throw std::invalid_argument("Manifold::spd_m: not an SPD manifold");
        return size_;
    }

    // Lower bound on the Ricci curvature used by the step-size theory:
    // 0 on the circle, d-1 on Sphere(d), -(m(m+1)-1)/4 on Spd(m).
    double ricci_lower_bound() const {
        switch (kind_) {
        case ManifoldKind::Circle: return 0.0;
        case ManifoldKind::Sphere: return static_cast<double>(size_ - 1);
        case ManifoldKind::Spd:    return -(static_cast<double>(size_) * (size_ + 1) - 1.0) / 4.0;
        }
        return 0.0;
    }

    bool operator==(const Manifold& o) const { return kind_ == o.kind_ && size_ == o.size_; }
    bool operator!=(const Manifold& o) const { return !(*this == o); }

private:
    Manifold(ManifoldKind kind, int size) : kind_(kind), size_(size) {}

    ManifoldKind kind_;
    int size_; // d for spheres, m for SPD, 1 for the circle
};

// Angle helpers for the circle chart.
double wrap_angle_02pi(double a);   // representative in [0, 2*pi)
double wrap_angle_pi(double a);     // representative in (-pi, pi]

// A point on one of the supported manifolds.  Storage:
//   Circle — 1x1 matrix holding the angle in [0, 2*pi)
//   Sphere — (d+1)x1 unit column vector
//   Spd    — m x m SPD matrix
// Constructors validate the representation invariants (unit norm within
// 1e-10 before renormalization; symmetry defect <= 1e-12 and positive
// definiteness for SPD) and throw std::invalid_argument on violation.
class Point {
public:
    static Point circle(double angle);
    static Point sphere(const Eigen::VectorXd& v);
    static Point spd(const Eigen::MatrixXd& x);

    const Manifold& manifold() const { return man_; }
    const Eigen::MatrixXd& value() const { return value_; }

    double angle() const; // circle only
    Eigen::VectorXd vec() const; // sphere only: the unit vector

private:
    Point(Manifold man, Eigen::MatrixXd value) : man_(man), value_(std::move(value)) {}

    Manifold man_;
    Eigen::MatrixXd value_;

    friend Point exp_map(const Point&, const class TangentVector&);
};

// A tangent vector attached to a base point.  Storage matches the base:
// scalar (1x1), ambient column orthogonal to the base point, or a symmetric
// m x m matrix.  Constructors validate tangency (orthogonality defect /
// symmetry defect <= 1e-10 relative).
class TangentVector {
public:
    TangentVector(const Point& base, const Eigen::MatrixXd& v);

    static TangentVector zero(const Point& base);

    const Point& base() const { return base_; }
    const Eigen::MatrixXd& value() const { return value_; }

    TangentVector operator*(double s) const { return TangentVector(base_, value_ * s, true); }
    TangentVector operator+(const TangentVector& o) const;
    TangentVector operator-() const { return TangentVector(base_, -value_, true); }

private:
    TangentVector(const Point& base, Eigen::MatrixXd v, bool /*trusted*/)
        : base_(base), value_(std::move(v)) {}

    Point base_;
    Eigen::MatrixXd value_;

    friend TangentVector log_map(const Point&, const Point&);
    friend TangentVector riemannian_grad(const Eigen::MatrixXd&, const Point&);
    friend TangentVector sample_tangent_gaussian(const Point&, double, CounterRng&);
    friend TangentVector grad_dist_sq(const Point&, const Point&);
};

// Geodesic distance.
double distance(const Point& x, const Point& y);

// Riemannian exponential map.  Sphere results are renormalized; SPD results
// are re-symmetrized so Point invariants hold exactly.
Point exp_map(const Point& x, const TangentVector& v);

// Riemannian logarithm; throws CutLocusError when y is numerically at the
// cut locus of x (antipode on spheres).
TangentVector log_map(const Point& x, const Point& y);

// Gradient in x of d(x, y)^2, i.e. -2 log_x(y).
TangentVector grad_dist_sq(const Point& x, const Point& y);

// Convert an ambient/Euclidean gradient into the Riemannian gradient:
// tangent projection on spheres, X * sym(G) * X on SPD, identity on the
// circle chart.
TangentVector riemannian_grad(const Eigen::MatrixXd& euclidean_grad, const Point& x);

// Metric inner product / norm of tangent vectors (bases must match).
double inner(const TangentVector& a, const TangentVector& b);
double norm(const TangentVector& v);

// Isotropic tangent Gaussian with variance t per intrinsic dimension:
// E ||v||_g^2 = t * dim.
TangentVector sample_tangent_gaussian(const Point& x, double t, CounterRng& rng);

// SPD spectral helpers (shared with the Riemannian Gaussian sampler).
// Eigenvalues below 1e-14 are clamped before log; clamping by more than a
// 1e-10 relative defect raises NumericError.
Eigen::MatrixXd spd_matrix_sqrt(const Eigen::MatrixXd& x);
Eigen::MatrixXd spd_matrix_inv_sqrt(const Eigen::MatrixXd& x);
Eigen::MatrixXd spd_matrix_log(const Eigen::MatrixXd& x);
Eigen::MatrixXd sym_matrix_exp(const Eigen::MatrixXd& s);

} // namespace rps
