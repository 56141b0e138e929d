#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rps::testing {

double simpson(double a, double b, int n, const std::function<double(double)>& f) {
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) {
        acc += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
    }
    return acc * h / 3.0;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double stat = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double c = cdf(samples[i]);
        stat = std::max(stat, std::abs(c - static_cast<double>(i) / n));
        stat = std::max(stat, std::abs(static_cast<double>(i + 1) / n - c));
    }
    return stat;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double stat = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) {
            ++i;
        } else {
            ++j;
        }
        stat = std::max(stat, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return stat;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("ls_slope: need two equal-length series");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

GridInverseCdf::GridInverseCdf(const std::function<double(double)>& unnorm, double lo, double hi,
                               int points) {
    if (points < 2 || !(hi > lo)) {
        throw std::invalid_argument("GridInverseCdf: bad grid");
    }
    xs_.resize(points);
    cum_.resize(points);
    std::vector<double> vals(points);
    const double h = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
        xs_[i] = lo + i * h;
        vals[i] = unnorm(xs_[i]);
        if (!(vals[i] >= 0.0)) {
            throw std::invalid_argument("GridInverseCdf: negative density");
        }
    }
    cum_[0] = 0.0;
    for (int i = 1; i < points; ++i) {
        cum_[i] = cum_[i - 1] + 0.5 * (vals[i - 1] + vals[i]) * h;
    }
    const double total = cum_.back();
    if (!(total > 0.0)) {
        throw std::invalid_argument("GridInverseCdf: zero total mass");
    }
    for (double& c : cum_) c /= total;
}

double GridInverseCdf::sample(double u) const {
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.begin()) return xs_.front();
    if (it == cum_.end()) return xs_.back();
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin());
    const double c0 = cum_[i - 1];
    const double c1 = cum_[i];
    const double w = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.5;
    return xs_[i - 1] + w * (xs_[i] - xs_[i - 1]);
}

double GridInverseCdf::cdf(double x) const {
    if (x <= xs_.front()) return 0.0;
    if (x >= xs_.back()) return 1.0;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    const double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    return cum_[i - 1] + w * (cum_[i] - cum_[i - 1]);
}

double wrapped_gaussian(double t, double phi, int n_max) {
    const double two_pi = 2.0 * M_PI;
    double acc = 0.0;
    for (int n = -n_max; n <= n_max; ++n) {
        const double u = phi + two_pi * n;
        acc += std::exp(-u * u / (2.0 * t));
    }
    return acc / std::sqrt(two_pi * t);
}

double vmf_distsq_truth(int d, double kappa_eff) {
    const auto weight = [&](double r) {
        // exp(kappa (cos r - 1)) keeps the integrand in range for large kappa.
        return std::exp(kappa_eff * (std::cos(r) - 1.0)) * std::pow(std::sin(r), d - 1);
    };
    const double num = simpson(0.0, M_PI, 20000, [&](double r) { return r * r * weight(r); });
    const double den = simpson(0.0, M_PI, 20000, weight);
    return num / den;
}

} // namespace rps::testing
