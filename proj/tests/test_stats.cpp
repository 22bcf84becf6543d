#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kyle/errors.hpp"
#include "kyle/stats.hpp"

namespace kyle::stats {
namespace {

TEST(Stats, MeanAndStandardError) {
    const std::vector<double> x{1, 2, 3, 4};
    const auto m = mean(x);
    EXPECT_DOUBLE_EQ(m.value, 2.5);
    // sample variance 5/3, se = sqrt(5/3/4)
    EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 12.0), 1e-15);
}

TEST(Stats, CovarianceOfKnownSample) {
    const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8};
    EXPECT_NEAR(covariance(x, y).value, 2.5, 1e-15);  // population form: 1.25 * 2
    EXPECT_NEAR(covariance(x, x).value, 1.25, 1e-15);
}

TEST(Stats, MedianAbs) {
    EXPECT_EQ(median_abs({-3, 1, 2}), 2.0);
    EXPECT_EQ(median_abs({-4, 1, -2, 3}), 2.5);
    EXPECT_EQ(median_abs({-7}), 7.0);
}

TEST(Stats, OlsRecoversSlope) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> x(20000), y(20000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = g(rng);
        y[i] = 0.7 - 1.3 * x[i] + 0.5 * g(rng);
    }
    const auto b = ols_slope(x, y);
    EXPECT_NEAR(b.std_error, 0.5 / std::sqrt(20000.0), 2e-4);
    EXPECT_NEAR(b.value, -1.3, 4.0 * b.std_error);
}

TEST(Stats, WeightedUniformEqualsPlain) {
    const std::vector<double> x{0.5, -1.0, 2.0, 3.5, 0.0};
    const std::vector<double> w(x.size(), 2.0);
    const Weighted wt(w);
    EXPECT_NEAR(wt.mean(x).value, mean(x).value, 1e-15);
    EXPECT_NEAR(wt.ess(), 5.0, 1e-15);
    EXPECT_NEAR(wt.covariance(x, x).value, covariance(x, x).value, 1e-15);
}

TEST(Stats, WeightedReweightsGaussianMean) {
    // N(0,1) draws, weights exp(a x - a^2/2) move the mean to a
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    const double a = 0.4;
    std::vector<double> x(100000), w(100000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = g(rng);
        w[i] = std::exp(a * x[i] - 0.5 * a * a);
    }
    const Weighted wt(w);
    const auto m = wt.mean(x);
    EXPECT_NEAR(m.value, a, 3.5 * m.std_error);
    EXPECT_NEAR(wt.covariance(x, x).value, 1.0, 0.02);
    EXPECT_NEAR(wt.ess() / x.size(), std::exp(-a * a), 0.01);
}

TEST(Stats, TooFewSamples) {
    EXPECT_THROW(mean({1.0}), InsufficientPaths);
    EXPECT_THROW(ols_slope({1.0, 2.0}, {1.0, 2.0}), InsufficientPaths);
    EXPECT_THROW(median_abs({}), InsufficientPaths);
}

}  // namespace
}  // namespace kyle::stats
