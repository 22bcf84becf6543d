#pragma once

#include <optional>

#include "kyle/calibration.hpp"
#include "kyle/linalg.hpp"
#include "kyle/params.hpp"

namespace kyle {

struct CoefficientSample {
    double t = 0.0;
    double p = 0.0;
    double q = 0.0;
    double s = 0.0;
    double k = 0.0;
    Vec2 r;
    double f = 0.0;
    double one_minus_f = 1.0;
    Mat2 Sigma;
    std::optional<Mat2> Sigma_inv;  // absent at t = T
    double b = 0.0;
    Vec2 a;
    double int_k2 = 0.0;
};

// k_t needs only (v, Lambda); calibration uses it for k_0 before m is known.
double filter_gain_k(double t, const ValidatedParams& params, double v, double lambda_T);

// -log(1-g)/g, continuous at g = 0.
double neg_log1m_over(double g);

class Coefficients {
public:
    Coefficients(const ValidatedParams& params, const Calibration& calib);

    CoefficientSample eval(double t) const;

    double p(double t) const;
    double q(double t) const;
    double s(double t) const;
    double k(double t) const;
    Vec2 r(double t) const;
    double b(double t) const;
    Vec2 a(double t) const;

    double int_k_squared(double t) const;
    double f_naive(double t) const;
    double one_minus_f_stable(double t) const;
    Mat2 sigma(double t) const;
    Mat2 sigma_inv(double t) const;

    // Phi_{s,t}(x). At t = T the closed-form projection is returned.
    Vec2 flow(double s, double t, Vec2 x) const;
    Vec2 projection(Vec2 x) const;

    double q_T() const { return q_T_; }
    double s_T() const { return s_T_; }
    double horizon() const { return T_; }

    const ValidatedParams& params() const { return vp_; }
    const Calibration& calibration() const { return cal_; }

private:
    void check_time(double t) const;
    double g(double t) const { return c_ * (T_ - t); }

    ValidatedParams vp_;
    Calibration cal_;
    double T_;
    double sig2_;
    double a_;      // v*eps*gamma/sigma_e
    double c_;      // gamma*sigma^2*Lambda
    double q_T_;
    double s_T_;
    double u_scale_;  // 1/(sigma_e v)
};

}  // namespace kyle
