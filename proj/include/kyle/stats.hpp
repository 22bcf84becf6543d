#pragma once

#include <cstddef>
#include <vector>

namespace kyle::stats {

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

Estimate mean(const std::vector<double>& x);
// Sample covariance of (x, y) with a plug-in standard error.
Estimate covariance(const std::vector<double>& x, const std::vector<double>& y);
double median_abs(std::vector<double> x);

// Slope of y on (1, x) with the homoskedastic OLS standard error.
Estimate ols_slope(const std::vector<double>& x, const std::vector<double>& y);

// Self-normalized importance-sampling moments.
struct Weighted {
    explicit Weighted(const std::vector<double>& w);
    Estimate mean(const std::vector<double>& x) const;
    Estimate covariance(const std::vector<double>& x, const std::vector<double>& y) const;
    double ess() const { return ess_; }

private:
    Estimate ratio(const std::vector<double>& f) const;
    const std::vector<double>& w_;
    double sum_w_ = 0.0;
    double ess_ = 0.0;
};

}  // namespace kyle::stats
