#pragma once

#include "kyle/params.hpp"

namespace kyle {

struct Calibration {
    double v = 0.0;         // std of chi_T under Q
    double lambda_T = 0.0;  // terminal Kyle lambda, sigma_e/v - eps*gamma
    double m = 0.0;         // mean of chi_T under Q
    double g_v = 0.0;       // gamma*sigma^2*T*lambda_T, in [0, 1)
    double sigma_e = 0.0;
};

// Signed residual of the calibration equation in x = sigma_e/v - eps*gamma.
double objective_F(double x, const ValidatedParams& params);

// v, Lambda and m. Closed forms for gamma = 0 and eps = 0, bisection otherwise.
Calibration solve_v(const ValidatedParams& params);

// Bisection for Lambda on [0, (1 - 1e-14)/(gamma sigma^2 T)], usable for every
// parameter set (solve_v only uses it when no closed form applies).
double bisect_lambda(const ValidatedParams& params);

double solve_m(const ValidatedParams& params, double v, double lambda_T, double k0);

// Lower end of the admissible band for v*eps*gamma/sigma_e (upper end is 1).
double v_band_lower(const ValidatedParams& params);

}  // namespace kyle
