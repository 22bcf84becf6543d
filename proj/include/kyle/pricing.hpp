#pragma once

#include "kyle/coefficients.hpp"

namespace kyle {

// u(t, chi) = p_t chi^2 / 2 + q_t chi + s_t
double u_value(double t, double chi, const Coefficients& coeffs);

// P(t, chi) = p_t chi + q_t
double price(double t, double chi, const Coefficients& coeffs);

// Central-difference value of u_t + sigma^2/2 u_xx + gamma sigma^2/2 u_x^2.
// fd_step is the time step; the chi step is 1e-4 (1 + |chi|).
double pde_residual(double t, double chi, const Coefficients& coeffs, double fd_step);

}  // namespace kyle
