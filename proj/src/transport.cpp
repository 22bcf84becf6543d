#include "kyle/transport.hpp"

#include "kyle/errors.hpp"

namespace kyle {

double surplus(double x, double xi, const ValidatedParams& vp) { return xi * x - 0.5 * vp.eg * x * x; }

double gamma_potential(double chi, const Calibration& c, const ValidatedParams& vp) {
    const auto& p = vp.raw;
    const double d = chi - c.m;
    return 0.5 * c.lambda_T * d * d + (p.m_xi - vp.eg * (p.m_beta + c.m)) * d - 0.5 * vp.eg * c.m * c.m;
}

double gamma_c(double z, double xi, const Calibration& c, const ValidatedParams& vp) {
    const auto& p = vp.raw;
    const double inner = xi - p.m_xi + vp.eg * (z + p.m_beta);
    return 0.5 * (-2.0 * xi * z - vp.eg * z * z + (c.v / vp.sigma_e) * inner * inner +
                  2.0 * c.m * (xi + vp.eg * z));
}

double ot_map(double z, double xi, const Calibration& c, const ValidatedParams& vp) {
    const auto& p = vp.raw;
    return c.m + (c.v / vp.sigma_e) * ((xi - p.m_xi) + vp.eg * (z + p.m_beta));
}

double concave_argmax(double z, double xi, const Calibration& c, const ValidatedParams& vp) {
    const auto& p = vp.raw;
    // d/dx [xi (x-z) - eg/2 (x-z)^2 - Gamma(x)] = 0
    const double curvature = vp.eg + c.lambda_T;
    if (!(curvature > 0.0)) throw DegenerateError("concave_argmax: eps*gamma + Lambda <= 0");
    const double lin = p.m_xi - vp.eg * (p.m_beta + c.m);
    return (xi + vp.eg * z + c.lambda_T * c.m - lin) / curvature;
}

ConditionalLaw conditional_law(double chi_T, const Calibration& c, const ValidatedParams& vp) {
    const auto& p = vp.raw;
    ConditionalLaw law;
    law.mean = Vec2{-p.m_beta, p.m_xi} + ((chi_T - c.m) / (vp.sigma_e * c.v)) * vp.vec.u;
    const double scale = vp.var_z_t * p.sigma_xi * p.sigma_xi / (vp.sigma_e * vp.sigma_e);
    law.cov = scale * outer(vp.vec.v, vp.vec.v);
    return law;
}

GaussianMarginal source_z(const ValidatedParams& vp) { return {-vp.raw.m_beta, vp.var_z_t}; }

GaussianMarginal source_xi(const ValidatedParams& vp) {
    return {vp.raw.m_xi, vp.raw.sigma_xi * vp.raw.sigma_xi};
}

GaussianMarginal target_law(const Calibration& c) { return {c.m, c.v * c.v}; }

}  // namespace kyle
