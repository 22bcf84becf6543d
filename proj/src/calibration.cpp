#include "kyle/calibration.hpp"

#include <cmath>
#include <string>

#include "kyle/coefficients.hpp"
#include "kyle/errors.hpp"

namespace kyle {

namespace {

constexpr int kBisectionIters = 200;
constexpr double kBracketShrink = 1e-14;
constexpr double kResidualTol = 1e-10;

double rhs_constant(const ValidatedParams& vp) {
    const auto& p = vp.raw;
    const double s2t = p.sigma * p.sigma * p.horizon;
    return (p.sigma_xi * p.sigma_xi + vp.eg * vp.eg * p.sigma_beta * p.sigma_beta) / s2t;
}

}  // namespace

double objective_F(double x, const ValidatedParams& vp) {
    const auto& p = vp.raw;
    const double s2t = p.sigma * p.sigma * p.horizon;
    const double g = p.gamma * s2t;
    if (!(x >= 0.0) || (g > 0.0 && g * x >= 1.0)) {
        throw DomainError("x", "outside [0, 1/(gamma sigma^2 T))");
    }
    const double one_minus = 1.0 - g * x;
    return x * x / one_minus - (2.0 * p.eps / s2t) * std::log1p(-g * x) - rhs_constant(vp);
}

double solve_m(const ValidatedParams& vp, double v, double lambda_T, double k0) {
    const auto& p = vp.raw;
    if (!(lambda_T > 0.0) || !std::isfinite(k0)) throw DomainError("lambda_T", "need lambda > 0 and finite k0");
    const double slope = (k0 - 1.0) / lambda_T;
    const double denom = 1.0 + (vp.sigma_e / v) * slope;
    if (std::abs(denom) < 1e-300) throw DegenerateError("solve_m: vanishing denominator");
    return (p.m_xi - vp.eg * p.m_beta) * slope / denom;
}

double v_band_lower(const ValidatedParams& vp) {
    const auto& p = vp.raw;
    return 1.0 / (1.0 + 1.0 / (p.eps * p.gamma * p.gamma * p.sigma * p.sigma * p.horizon));
}

double bisect_lambda(const ValidatedParams& vp) {
    const auto& p = vp.raw;
    const double s2t = p.sigma * p.sigma * p.horizon;
    // F(0) < 0 and F blows up at the right end, so the root is bracketed.
    // Without risk aversion F(x) = x^2 - c and sqrt(c) bounds the root.
    double lo = 0.0;
    double hi = p.gamma > 0.0 ? (1.0 - kBracketShrink) / (p.gamma * s2t) : 2.0 * std::sqrt(rhs_constant(vp)) + 1.0;
    for (int i = 0; i < kBisectionIters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (objective_F(mid, vp) > 0.0 ? hi : lo) = mid;
    }
    const double x = 0.5 * (lo + hi);
    const double res = objective_F(x, vp);
    if (!(std::abs(res) <= kResidualTol)) {
        throw ConvergenceError("bisect_lambda: residual " + std::to_string(res) + " at x=" + std::to_string(x));
    }
    return x;
}

Calibration solve_v(const ValidatedParams& vp) {
    const auto& p = vp.raw;
    const double sqrt_t = std::sqrt(p.horizon);
    const double s2t = p.sigma * p.sigma * p.horizon;

    Calibration c;
    c.sigma_e = vp.sigma_e;
    if (p.gamma == 0.0) {
        c.v = p.sigma * sqrt_t;
        c.lambda_T = vp.sigma_e / c.v;
    } else if (p.eps == 0.0) {
        const double gs = p.gamma * p.sigma_xi;
        c.v = 0.5 * gs * s2t + 0.5 * p.sigma * sqrt_t * std::sqrt(4.0 + gs * gs * s2t);
        c.lambda_T = vp.sigma_e / c.v;
    } else {
        const double x = bisect_lambda(vp);
        c.lambda_T = x;
        c.v = vp.sigma_e / (x + vp.eg);
    }
    c.g_v = p.gamma * s2t * c.lambda_T;
    c.m = solve_m(vp, c.v, c.lambda_T, filter_gain_k(0.0, vp, c.v, c.lambda_T));
    return c;
}

}  // namespace kyle
