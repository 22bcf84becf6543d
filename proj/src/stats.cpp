#include "kyle/stats.hpp"

#include <algorithm>
#include <cmath>

#include "kyle/errors.hpp"

namespace kyle::stats {

namespace {

void need(std::size_t n, std::size_t at_least) {
    if (n < at_least) throw InsufficientPaths("need at least " + std::to_string(at_least) + " samples");
}

}  // namespace

Estimate mean(const std::vector<double>& x) {
    need(x.size(), 2);
    const double n = static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += v;
    const double m = s / n;
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

Estimate covariance(const std::vector<double>& x, const std::vector<double>& y) {
    need(x.size(), 2);
    const double mx = mean(x).value;
    const double my = mean(y).value;
    std::vector<double> prod(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) prod[i] = (x[i] - mx) * (y[i] - my);
    return mean(prod);
}

double median_abs(std::vector<double> x) {
    need(x.size(), 1);
    for (double& v : x) v = std::abs(v);
    const auto mid = x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2);
    std::nth_element(x.begin(), mid, x.end());
    if (x.size() % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(x.begin(), mid);
    return 0.5 * (lo + hi);
}

Estimate ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    need(x.size(), 3);
    const double n = static_cast<double>(x.size());
    const double mx = mean(x).value;
    const double my = mean(y).value;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double beta = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = (y[i] - my) - beta * (x[i] - mx);
        rss += r * r;
    }
    return {beta, std::sqrt(rss / (n - 2.0) / sxx)};
}

Weighted::Weighted(const std::vector<double>& w) : w_(w) {
    need(w.size(), 2);
    double s2 = 0.0;
    for (double v : w) {
        sum_w_ += v;
        s2 += v * v;
    }
    ess_ = sum_w_ * sum_w_ / s2;
}

Estimate Weighted::ratio(const std::vector<double>& f) const {
    double num = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) num += w_[i] * f[i];
    const double est = num / sum_w_;
    // delta-method variance of a ratio estimator
    double var = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = w_[i] * (f[i] - est);
        var += d * d;
    }
    return {est, std::sqrt(var) / sum_w_};
}

Estimate Weighted::mean(const std::vector<double>& x) const { return ratio(x); }

Estimate Weighted::covariance(const std::vector<double>& x, const std::vector<double>& y) const {
    const double mx = ratio(x).value;
    const double my = ratio(y).value;
    std::vector<double> prod(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) prod[i] = (x[i] - mx) * (y[i] - my);
    return ratio(prod);
}

}  // namespace kyle::stats
