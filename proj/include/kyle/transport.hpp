#pragma once

#include "kyle/calibration.hpp"
#include "kyle/linalg.hpp"
#include "kyle/params.hpp"

namespace kyle {

struct GaussianMarginal {
    double mean = 0.0;
    double var = 0.0;
};

struct ConditionalLaw {
    Vec2 mean;
    Mat2 cov;  // rank one, along v_vec
};

// S(x, xi) = xi x - (eps gamma / 2) x^2
double surplus(double x, double xi, const ValidatedParams& params);

double gamma_potential(double chi, const Calibration& calib, const ValidatedParams& params);
double gamma_c(double z, double xi, const Calibration& calib, const ValidatedParams& params);
double ot_map(double z, double xi, const Calibration& calib, const ValidatedParams& params);

// Vertex of x -> S(x - z, xi) - Gamma(x), solved independently of ot_map.
// Throws DegenerateError if the map is not strictly concave.
double concave_argmax(double z, double xi, const Calibration& calib, const ValidatedParams& params);

ConditionalLaw conditional_law(double chi_T, const Calibration& calib, const ValidatedParams& params);

// Laws of Z^Q_T - beta and Xi under Q, and the target law of chi_T.
GaussianMarginal source_z(const ValidatedParams& params);
GaussianMarginal source_xi(const ValidatedParams& params);
GaussianMarginal target_law(const Calibration& calib);

}  // namespace kyle
