#include "kyle/coefficients.hpp"

#include <algorithm>
#include <cmath>

#include "kyle/errors.hpp"

namespace kyle {

namespace {

// log(1+y)/y, continuous at y = 0.
double log1p_over(double y) {
    if (std::abs(y) < 1e-8) return 1.0 - y / 2.0 + y * y / 3.0;
    return std::log1p(y) / y;
}

}  // namespace

double neg_log1m_over(double g) {
    if (std::abs(g) < 1e-8) return 1.0 + g / 2.0 + g * g / 3.0;
    return -std::log1p(-g) / g;
}

double filter_gain_k(double t, const ValidatedParams& vp, double v, double lambda_T) {
    const auto& p = vp.raw;
    const double a = v * vp.eg / vp.sigma_e;
    const double g = p.gamma * p.sigma * p.sigma * lambda_T * (p.horizon - t);
    return (1.0 - a * g) / (1.0 - g);
}

Coefficients::Coefficients(const ValidatedParams& params, const Calibration& calib)
    : vp_(params), cal_(calib) {
    const auto& p = vp_.raw;
    T_ = p.horizon;
    sig2_ = p.sigma * p.sigma;
    a_ = cal_.v * vp_.eg / vp_.sigma_e;
    c_ = p.gamma * sig2_ * cal_.lambda_T;
    q_T_ = p.m_xi - vp_.eg * p.m_beta - (vp_.sigma_e / cal_.v) * cal_.m;
    s_T_ = vp_.sigma_e * cal_.m * cal_.m / (2.0 * cal_.v) - cal_.m * (p.m_xi - vp_.eg * p.m_beta);
    u_scale_ = 1.0 / (vp_.sigma_e * cal_.v);
}

void Coefficients::check_time(double t) const {
    if (!(t >= 0.0 && t <= T_)) throw DomainError("t", "outside [0, T]");
}

double Coefficients::p(double t) const { return cal_.lambda_T / (1.0 - g(t)); }

double Coefficients::q(double t) const { return q_T_ / (1.0 - g(t)); }

double Coefficients::s(double t) const {
    const double gt = g(t);
    // s_t = s_T + int_t^T sigma^2/2 (p + gamma q^2). The first piece is
    // -(1/2gamma) log(1-g), written so that gamma = 0 is the same expression.
    const double log_term = 0.5 * sig2_ * cal_.lambda_T * (T_ - t) * neg_log1m_over(gt);
    return log_term + (q_T_ * q_T_ / (2.0 * cal_.lambda_T)) * (gt / (1.0 - gt)) + s_T_;
}

double Coefficients::k(double t) const {
    const double gt = g(t);
    return (1.0 - a_ * gt) / (1.0 - gt);
}

Vec2 Coefficients::r(double t) const { return (k(t) * u_scale_) * vp_.vec.u; }

double Coefficients::b(double t) const { return -cal_.m - (q_T_ / cal_.lambda_T) * (1.0 - k(t)); }

Vec2 Coefficients::a(double t) const {
    const Vec2 mean0{-vp_.raw.m_beta, vp_.raw.m_xi};
    return mean0 + (b(t) * u_scale_) * vp_.vec.u;
}

double Coefficients::int_k_squared(double t) const {
    check_time(t);
    const double g0 = g(0.0);
    const double gt = g(t);
    const double y = c_ * t / (1.0 - g0);
    const double one_a = 1.0 - a_;
    return a_ * a_ * t + one_a * one_a * t / ((1.0 - g0) * (1.0 - gt)) +
           2.0 * a_ * one_a * (t / (1.0 - g0)) * log1p_over(y);
}

double Coefficients::f_naive(double t) const {
    check_time(t);
    if (t == 0.0) return 0.0;
    const auto& p = vp_.raw;
    const double d11 = sig2_ * t + p.sigma_beta * p.sigma_beta;
    const Vec2 u = vp_.vec.u;
    const double utdu = u.x * u.x / d11 + u.y * u.y / (p.sigma_xi * p.sigma_xi);
    return sig2_ * int_k_squared(t) * u_scale_ * u_scale_ * utdu;
}

double Coefficients::one_minus_f_stable(double t) const {
    check_time(t);
    if (t == 0.0) return 1.0;
    const auto& p = vp_.raw;
    const double tau = T_ - t;
    const double d11 = sig2_ * t + p.sigma_beta * p.sigma_beta;
    const double gt = g(t);
    const double one_a = 1.0 - a_;
    // (1/(T-t)) int_t^T k^2
    const double J = a_ * a_ + one_a * one_a / (1.0 - gt) + 2.0 * a_ * one_a * neg_log1m_over(gt);
    const double rho_rate = sig2_ * vp_.eg * vp_.eg * vp_.var_z_t / (vp_.sigma_e * vp_.sigma_e * d11);
    const double v2 = cal_.v * cal_.v;
    return tau * ((sig2_ / v2) * J * (1.0 + tau * rho_rate) - rho_rate);
}

Mat2 Coefficients::sigma(double t) const {
    check_time(t);
    const auto& p = vp_.raw;
    const Mat2 d = Mat2::diag(sig2_ * t + p.sigma_beta * p.sigma_beta, p.sigma_xi * p.sigma_xi);
    const double scale = sig2_ * int_k_squared(t) * u_scale_ * u_scale_;
    return d - scale * outer(vp_.vec.u, vp_.vec.u);
}

Mat2 Coefficients::sigma_inv(double t) const {
    check_time(t);
    if (t >= T_) throw SingularError("sigma_inv: Sigma_T has rank one");
    const auto& p = vp_.raw;
    const double d11 = sig2_ * t + p.sigma_beta * p.sigma_beta;
    if (d11 <= 0.0) throw SingularError("sigma_inv: Sigma_0 singular when sigma_beta = 0");
    const Vec2 du{vp_.vec.u.x / d11, vp_.vec.u.y / (p.sigma_xi * p.sigma_xi)};
    const double scale = sig2_ * int_k_squared(t) * u_scale_ * u_scale_ / one_minus_f_stable(t);
    return Mat2::diag(1.0 / d11, 1.0 / (p.sigma_xi * p.sigma_xi)) + scale * outer(du, du);
}

Vec2 Coefficients::projection(Vec2 x) const {
    return x - (dot(vp_.vec.w, x) / (vp_.sigma_e * vp_.sigma_e)) * vp_.vec.u;
}

Vec2 Coefficients::flow(double s, double t, Vec2 x) const {
    check_time(s);
    check_time(t);
    if (s > t) throw DomainError("flow", "requires s <= t");
    if (s == t) return x;
    if (t == T_) return projection(x);

    // x_tau = x + y_tau u; y solves a scalar linear ODE. Integrate in
    // varsigma = -log(T - tau) so the 1/(T-tau) stiffness becomes O(1).
    const Vec2 u = vp_.vec.u;
    const Vec2 e1 = vp_.vec.e1;
    auto rhs = [&](double vs, double y) {
        const double tau = T_ - std::exp(-vs);
        const double kt = k(tau);
        const Vec2 h = (sig2_ * kt * u_scale_) * (sigma_inv(tau) * (r(tau) - e1));
        return -(T_ - tau) * (dot(h, x) + dot(h, u) * y);
    };
    const double vs0 = -std::log(T_ - s);
    const double vs1 = -std::log(T_ - t);
    const int n = std::max(64, static_cast<int>(std::ceil((vs1 - vs0) / 2e-3)));
    const double hs = (vs1 - vs0) / n;
    double y = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = vs0 + i * hs;
        const double k1 = rhs(z, y);
        const double k2 = rhs(z + 0.5 * hs, y + 0.5 * hs * k1);
        const double k3 = rhs(z + 0.5 * hs, y + 0.5 * hs * k2);
        const double k4 = rhs(z + hs, y + hs * k3);
        y += hs * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    return x + y * u;
}

CoefficientSample Coefficients::eval(double t) const {
    check_time(t);
    CoefficientSample out;
    out.t = t;
    out.p = p(t);
    out.q = q(t);
    out.s = s(t);
    out.k = k(t);
    out.r = r(t);
    out.int_k2 = int_k_squared(t);
    out.Sigma = sigma(t);
    if (t < T_) {
        out.f = f_naive(t);
        out.one_minus_f = one_minus_f_stable(t);
        const double d11 = sig2_ * t + vp_.raw.sigma_beta * vp_.raw.sigma_beta;
        if (d11 > 0.0) out.Sigma_inv = sigma_inv(t);
    } else {
        out.f = 1.0;
        out.one_minus_f = 0.0;
    }
    out.b = b(t);
    out.a = a(t);
    return out;
}

}  // namespace kyle
