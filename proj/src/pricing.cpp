#include "kyle/pricing.hpp"

#include <cmath>

#include "kyle/errors.hpp"

namespace kyle {

double u_value(double t, double chi, const Coefficients& c) {
    return 0.5 * c.p(t) * chi * chi + c.q(t) * chi + c.s(t);
}

double price(double t, double chi, const Coefficients& c) { return c.p(t) * chi + c.q(t); }

double pde_residual(double t, double chi, const Coefficients& c, double fd_step) {
    const double T = c.horizon();
    if (!(fd_step > 0.0)) throw DomainError("fd_step", "must be > 0");
    if (!(t > fd_step && t < T - fd_step)) throw DomainError("t", "too close to the boundary for fd_step");
    const auto& p = c.params().raw;
    const double hx = 1e-4 * (1.0 + std::abs(chi));

    const double u0 = u_value(t, chi, c);
    const double ut = (u_value(t + fd_step, chi, c) - u_value(t - fd_step, chi, c)) / (2.0 * fd_step);
    const double up = u_value(t, chi + hx, c);
    const double um = u_value(t, chi - hx, c);
    const double ux = (up - um) / (2.0 * hx);
    const double uxx = (up - 2.0 * u0 + um) / (hx * hx);
    const double s2 = p.sigma * p.sigma;
    return ut + 0.5 * s2 * uxx + 0.5 * p.gamma * s2 * ux * ux;
}

}  // namespace kyle
