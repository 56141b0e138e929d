#include "rps/manifold.hpp"

#include <cmath>

namespace rps {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;

// Smallest admissible eigenvalue when taking matrix logs / inverse roots.
constexpr double kEigFloor = 1e-14;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
    return 0.5 * (a + a.transpose());
}

// Apply f to the eigenvalues of a symmetric matrix.  `floor_first` clamps
// eigenvalues up to kEigFloor (for log / x^{-1/2}); a clamp that moves an
// eigenvalue by more than 1e-10 relative to the largest magnitude means the
// input was not meaningfully SPD and is reported as a NumericError.
template <typename F>
Eigen::MatrixXd sym_apply(const Eigen::MatrixXd& x, F f, bool floor_first, const char* who) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(x));
    if (es.info() != Eigen::Success)
        throw NumericError(std::string(who) + ": eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    if (floor_first) {
        const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
        for (int i = 0; i < ev.size(); ++i) {
            if (ev(i) < kEigFloor) {
                if (kEigFloor - ev(i) > 1e-10 * scale)
                    throw NumericError(std::string(who) + ": matrix is not positive definite (eigenvalue " +
                                       std::to_string(ev(i)) + ")");
                ev(i) = kEigFloor;
            }
        }
    }
    for (int i = 0; i < ev.size(); ++i)
        ev(i) = f(ev(i));
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace

double wrap_angle_02pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    if (r >= kTwoPi) // fmod can land exactly on 2*pi after the add
        r -= kTwoPi;
    return r;
}

double wrap_angle_pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r <= -kPi)
        r += kTwoPi;
    else if (r > kPi)
        r -= kTwoPi;
    return r;
}

Eigen::MatrixXd spd_matrix_sqrt(const Eigen::MatrixXd& x) {
    return sym_apply(x, [](double e) { return std::sqrt(e); }, true, "spd_matrix_sqrt");
}

Eigen::MatrixXd spd_matrix_inv_sqrt(const Eigen::MatrixXd& x) {
    return sym_apply(x, [](double e) { return 1.0 / std::sqrt(e); }, true, "spd_matrix_inv_sqrt");
}

Eigen::MatrixXd spd_matrix_log(const Eigen::MatrixXd& x) {
    return sym_apply(x, [](double e) { return std::log(e); }, true, "spd_matrix_log");
}

Eigen::MatrixXd sym_matrix_exp(const Eigen::MatrixXd& s) {
    return sym_apply(s, [](double e) { return std::exp(e); }, false, "sym_matrix_exp");
}

// ---------------------------------------------------------------------------
// Point
// ---------------------------------------------------------------------------

Point Point::circle(double angle) {
    if (!std::isfinite(angle))
        throw std::invalid_argument("Point::circle: angle must be finite");
    Eigen::MatrixXd v(1, 1);
    v(0, 0) = wrap_angle_02pi(angle);
    return Point(Manifold::circle(), std::move(v));
}

Point Point::sphere(const Eigen::VectorXd& v) {
    if (v.size() < 3)
        throw std::invalid_argument("Point::sphere: need an ambient vector in R^{d+1}, d >= 2");
    if (!v.allFinite())
        throw std::invalid_argument("Point::sphere: non-finite coordinates");
    const double n = v.norm();
    if (std::abs(n - 1.0) > 1e-10)
        throw std::invalid_argument("Point::sphere: vector is not unit norm (|norm-1| = " +
                                    std::to_string(std::abs(n - 1.0)) + ")");
    Eigen::MatrixXd m = v / n;
    return Point(Manifold::sphere(static_cast<int>(v.size()) - 1), std::move(m));
}

Point Point::spd(const Eigen::MatrixXd& x) {
    if (x.rows() != x.cols() || x.rows() < 2)
        throw std::invalid_argument("Point::spd: need a square matrix, m >= 2");
    if (!x.allFinite())
        throw std::invalid_argument("Point::spd: non-finite entries");
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    if ((x - x.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("Point::spd: symmetry defect exceeds 1e-12");
    Eigen::MatrixXd s = symmetrize(x);
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("Point::spd: matrix is not positive definite");
    return Point(Manifold::spd(static_cast<int>(x.rows())), std::move(s));
}

double Point::angle() const {
    if (man_.kind() != ManifoldKind::Circle)
        throw std::invalid_argument("Point::angle: not a circle point");
    return value_(0, 0);
}

Eigen::VectorXd Point::vec() const {
    if (man_.kind() != ManifoldKind::Sphere)
        throw std::invalid_argument("Point::vec: not a sphere point");
    return value_.col(0);
}

// ---------------------------------------------------------------------------
// TangentVector
// ---------------------------------------------------------------------------

TangentVector::TangentVector(const Point& base, const Eigen::MatrixXd& v)
    : base_(base), value_(v) {
    if (!v.allFinite())
        throw std::invalid_argument("TangentVector: non-finite entries");
    switch (base.manifold().kind()) {
    case ManifoldKind::Circle:
        if (v.rows() != 1 || v.cols() != 1)
            throw std::invalid_argument("TangentVector: circle tangent must be 1x1");
        break;
    case ManifoldKind::Sphere: {
        if (v.cols() != 1 || v.rows() != base.value().rows())
            throw std::invalid_argument("TangentVector: sphere tangent has wrong shape");
        const double defect = std::abs((base.value().col(0).dot(v.col(0))));
        if (defect > 1e-10 * std::max(1.0, v.norm()))
            throw std::invalid_argument("TangentVector: not orthogonal to the base point");
        break;
    }
    case ManifoldKind::Spd: {
        if (v.rows() != base.value().rows() || v.cols() != base.value().cols())
            throw std::invalid_argument("TangentVector: SPD tangent has wrong shape");
        const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
        if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
            throw std::invalid_argument("TangentVector: SPD tangent must be symmetric");
        value_ = symmetrize(v);
        break;
    }
    }
}

TangentVector TangentVector::zero(const Point& base) {
    return TangentVector(base, Eigen::MatrixXd::Zero(base.value().rows(), base.value().cols()), true);
}

TangentVector TangentVector::operator+(const TangentVector& o) const {
    if (base_.manifold() != o.base_.manifold())
        throw std::invalid_argument("TangentVector: mismatched manifolds");
    return TangentVector(base_, value_ + o.value_, true);
}

// ---------------------------------------------------------------------------
// Metric, exp, log
// ---------------------------------------------------------------------------

double distance(const Point& x, const Point& y) {
    if (x.manifold() != y.manifold())
        throw std::invalid_argument("distance: points on different manifolds");
    switch (x.manifold().kind()) {
    case ManifoldKind::Circle:
        return std::abs(wrap_angle_pi(y.angle() - x.angle()));
    case ManifoldKind::Sphere: {
        const double c = std::clamp(x.value().col(0).dot(y.value().col(0)), -1.0, 1.0);
        return std::acos(c);
    }
    case ManifoldKind::Spd: {
        const Eigen::MatrixXd xis = spd_matrix_inv_sqrt(x.value());
        const Eigen::MatrixXd s = symmetrize(xis * y.value() * xis);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
        if (es.info() != Eigen::Success)
            throw NumericError("distance: SPD eigendecomposition failed");
        double acc = 0.0;
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            const double e = std::max(es.eigenvalues()(i), kEigFloor);
            const double l = std::log(e);
            acc += l * l;
        }
        return std::sqrt(acc);
    }
    }
    return 0.0;
}

Point exp_map(const Point& x, const TangentVector& v) {
    if (v.base().manifold() != x.manifold())
        throw std::invalid_argument("exp_map: tangent vector from a different manifold");
    switch (x.manifold().kind()) {
    case ManifoldKind::Circle: {
        Eigen::MatrixXd val(1, 1);
        val(0, 0) = wrap_angle_02pi(x.angle() + v.value()(0, 0));
        return Point(x.manifold(), std::move(val));
    }
    case ManifoldKind::Sphere: {
        const Eigen::VectorXd xv = x.value().col(0);
        const Eigen::VectorXd tv = v.value().col(0);
        const double r = tv.norm();
        Eigen::VectorXd out;
        if (r < 1e-300) {
            out = xv;
        } else {
            out = std::cos(r) * xv + (std::sin(r) / r) * tv;
            out.normalize();
        }
        Eigen::MatrixXd m = out;
        return Point(x.manifold(), std::move(m));
    }
    case ManifoldKind::Spd: {
        const Eigen::MatrixXd xs = spd_matrix_sqrt(x.value());
        const Eigen::MatrixXd xis = spd_matrix_inv_sqrt(x.value());
        const Eigen::MatrixXd s = symmetrize(xis * v.value() * xis);
        Eigen::MatrixXd out = symmetrize(xs * sym_matrix_exp(s) * xs);
        return Point(x.manifold(), std::move(out));
    }
    }
    throw std::logic_error("exp_map: unreachable");
}

TangentVector log_map(const Point& x, const Point& y) {
    if (x.manifold() != y.manifold())
        throw std::invalid_argument("log_map: points on different manifolds");
    switch (x.manifold().kind()) {
    case ManifoldKind::Circle: {
        const double diff = wrap_angle_pi(y.angle() - x.angle());
        Eigen::MatrixXd v(1, 1);
        v(0, 0) = diff;
        return TangentVector(x, std::move(v), true);
    }
    case ManifoldKind::Sphere: {
        const Eigen::VectorXd xv = x.value().col(0);
        const Eigen::VectorXd yv = y.value().col(0);
        const double c = std::clamp(xv.dot(yv), -1.0, 1.0);
        if (c <= -1.0 + 1e-12)
            throw CutLocusError("log_map: points are numerically antipodal");
        const double theta = std::acos(c);
        Eigen::VectorXd u = yv - c * xv;
        const double un = u.norm();
        Eigen::MatrixXd v;
        if (un < 1e-300) {
            v = Eigen::MatrixXd::Zero(xv.size(), 1);
        } else {
            v = (theta / un) * u;
            // re-project: u may carry a sliver of the normal component
            v.col(0) -= xv.dot(v.col(0)) * xv;
        }
        return TangentVector(x, std::move(v), true);
    }
    case ManifoldKind::Spd: {
        const Eigen::MatrixXd xs = spd_matrix_sqrt(x.value());
        const Eigen::MatrixXd xis = spd_matrix_inv_sqrt(x.value());
        const Eigen::MatrixXd s = symmetrize(xis * y.value() * xis);
        Eigen::MatrixXd v = symmetrize(xs * spd_matrix_log(s) * xs);
        return TangentVector(x, std::move(v), true);
    }
    }
    throw std::logic_error("log_map: unreachable");
}

TangentVector grad_dist_sq(const Point& x, const Point& y) {
    TangentVector l = log_map(x, y);
    return TangentVector(x, -2.0 * l.value(), true);
}

TangentVector riemannian_grad(const Eigen::MatrixXd& euclidean_grad, const Point& x) {
    switch (x.manifold().kind()) {
    case ManifoldKind::Circle: {
        if (euclidean_grad.rows() != 1 || euclidean_grad.cols() != 1)
            throw std::invalid_argument("riemannian_grad: circle gradient must be 1x1");
        return TangentVector(x, euclidean_grad, true);
    }
    case ManifoldKind::Sphere: {
        if (euclidean_grad.cols() != 1 || euclidean_grad.rows() != x.value().rows())
            throw std::invalid_argument("riemannian_grad: sphere gradient has wrong shape");
        const Eigen::VectorXd xv = x.value().col(0);
        Eigen::MatrixXd g = euclidean_grad;
        g.col(0) -= xv.dot(g.col(0)) * xv;
        return TangentVector(x, std::move(g), true);
    }
    case ManifoldKind::Spd: {
        if (euclidean_grad.rows() != x.value().rows() || euclidean_grad.cols() != x.value().cols())
            throw std::invalid_argument("riemannian_grad: SPD gradient has wrong shape");
        const Eigen::MatrixXd g = symmetrize(euclidean_grad);
        Eigen::MatrixXd out = symmetrize(x.value() * g * x.value());
        return TangentVector(x, std::move(out), true);
    }
    }
    throw std::logic_error("riemannian_grad: unreachable");
}

double inner(const TangentVector& a, const TangentVector& b) {
    if (a.base().manifold() != b.base().manifold())
        throw std::invalid_argument("inner: mismatched manifolds");
    switch (a.base().manifold().kind()) {
    case ManifoldKind::Circle:
        return a.value()(0, 0) * b.value()(0, 0);
    case ManifoldKind::Sphere:
        return a.value().col(0).dot(b.value().col(0));
    case ManifoldKind::Spd: {
        // tr(X^-1 U X^-1 V) via two SPD solves
        const Eigen::LLT<Eigen::MatrixXd> llt(a.base().value());
        if (llt.info() != Eigen::Success)
            throw NumericError("inner: base point lost positive definiteness");
        const Eigen::MatrixXd iu = llt.solve(a.value());
        const Eigen::MatrixXd iv = llt.solve(b.value());
        return (iu * iv).trace();
    }
    }
    return 0.0;
}

double norm(const TangentVector& v) {
    return std::sqrt(std::max(0.0, inner(v, v)));
}

TangentVector sample_tangent_gaussian(const Point& x, double t, CounterRng& rng) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("sample_tangent_gaussian: t must be positive and finite");
    const double sd = std::sqrt(t);
    switch (x.manifold().kind()) {
    case ManifoldKind::Circle: {
        Eigen::MatrixXd v(1, 1);
        v(0, 0) = sd * rng.normal();
        return TangentVector(x, std::move(v), true);
    }
    case ManifoldKind::Sphere: {
        // Project an isotropic ambient Gaussian: the projection of
        // N(0, t I_{d+1}) onto T_x is N(0, t I_d) in any orthonormal frame.
        const Eigen::VectorXd xv = x.value().col(0);
        Eigen::VectorXd z(xv.size());
        for (int i = 0; i < z.size(); ++i)
            z(i) = sd * rng.normal();
        z -= xv.dot(z) * xv;
        Eigen::MatrixXd v = z;
        return TangentVector(x, std::move(v), true);
    }
    case ManifoldKind::Spd: {
        // S symmetric with S_ii ~ N(0, t), S_ij ~ N(0, t/2) mirrored gives an
        // isotropic Gaussian w.r.t. the metric at the identity; push to x by
        // congruence with x^{1/2}.
        const int m = x.manifold().spd_m();
        const double sd_off = std::sqrt(0.5 * t);
        Eigen::MatrixXd s(m, m);
        for (int i = 0; i < m; ++i) {
            s(i, i) = sd * rng.normal();
            for (int j = i + 1; j < m; ++j) {
                const double e = sd_off * rng.normal();
                s(i, j) = e;
                s(j, i) = e;
            }
        }
        const Eigen::MatrixXd xs = spd_matrix_sqrt(x.value());
        Eigen::MatrixXd v = symmetrize(xs * s * xs);
        return TangentVector(x, std::move(v), true);
    }
    }
    throw std::logic_error("sample_tangent_gaussian: unreachable");
}

} // namespace rps
