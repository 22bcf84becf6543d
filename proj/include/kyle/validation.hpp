#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kyle/calibration.hpp"
#include "kyle/coefficients.hpp"
#include "kyle/params.hpp"
#include "kyle/simulation.hpp"

namespace kyle {

enum class CheckKind {
    kWithin,    // |estimate - target| <= band
    kAtMost,    // estimate - target <= band (strict when band is 0)
    kAtLeast,   // target - estimate <= band (strict when band is 0)
};

struct CheckResult {
    std::string name;
    std::string group;
    double estimate = 0.0;
    double target = 0.0;
    double std_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::uint64_t n_samples = 0;
    CheckKind kind = CheckKind::kWithin;
    bool control = false;  // negative control: expected to fail
};

// band = max(tolerance, 3 std_error); sets and returns passed.
bool evaluate(CheckResult& c);

CheckResult make_check(std::string group, std::string name, double estimate, double target, double std_error,
                       double tolerance, std::uint64_t n_samples, CheckKind kind = CheckKind::kWithin);

struct ValidationReport {
    ModelParams params;
    RunConfig config;
    Calibration calibration;
    std::vector<CheckResult> checks;
    double runtime_seconds = 0.0;

    // true iff every regular check passed and every control failed
    bool ok() const;
};

// Closed-form and deterministic checks.
std::vector<CheckResult> check_calibration_closed_forms();
std::vector<CheckResult> check_k2_identity(const Coefficients& coeffs);
std::vector<CheckResult> check_sigma_degeneracy(const Coefficients& coeffs);
std::vector<CheckResult> check_pde(const Coefficients& coeffs, std::uint64_t seed, int n_points = 100);
std::vector<CheckResult> check_ot_duality(const ValidatedParams& params, const Calibration& calib,
                                          std::uint64_t seed, std::size_t n_triples = 100000,
                                          std::size_t n_push = 1000000);
std::vector<CheckResult> check_limits(const ModelParams& params);

// Monte Carlo checks. Paths come from simulate_ensemble.
std::vector<CheckResult> check_terminal_price(const Ensemble& coarse, const Ensemble& fine,
                                              const ValidatedParams& params, const Calibration& calib);
std::vector<CheckResult> check_chi_terminal_ot(const Ensemble& coarse, const Ensemble& fine,
                                               const Ensemble& main, const ValidatedParams& params,
                                               const Calibration& calib);
// Slopes of Y_{t+T/8} - Y_t on (1, chi_t). Snapshots at t and t + T/8 must exist.
std::vector<CheckResult> check_price_martingale(const Ensemble& paths, const Coefficients& coeffs,
                                                const std::vector<double>& times, bool control = false);
std::vector<CheckResult> check_increment_identity(const SimulatedPath& path, const Coefficients& coeffs);
std::vector<CheckResult> check_conditional_moments(const Ensemble& paths, const Coefficients& coeffs, double t);
std::vector<CheckResult> check_q_law(const Ensemble& paths, const ValidatedParams& params);
std::vector<CheckResult> check_mm_profit(const Ensemble& paths, const ValidatedParams& params,
                                         const Calibration& calib, bool control = false);
CheckResult check_insider_utility(const ValidatedParams& params, const Calibration& calib, double xi, double b,
                                  std::size_t n_samples, std::uint64_t seed);

// (eps/Lambda)(1 - eps gamma (sigma^2 T + sigma_beta^2)/(sigma_e v)) ln(1 - gamma Lambda sigma^2 T), the
// closed form as usually stated. Its derivation replaces the filter mean at T by the Q-conditional
// mean and so drops the gamma sigma^2 int P ds part of mu^P_T; Monte Carlo does not reproduce it.
double mm_profit_target(const ValidatedParams& params, const Calibration& calib);
// Same expectation keeping that term:
// (eps gamma/sigma_e^2)(-eps (sigma^2 T + sigma_beta^2) ln(1 - gamma Lambda sigma^2 T) - sigma_xi^2 sigma^2 T).
double mm_profit_target_exact(const ValidatedParams& params, const Calibration& calib);
double insider_utility_closed_form(const ValidatedParams& params, const Calibration& calib, double xi,
                                   double b);

struct ValidationOptions {
    bool timing = true;
    std::size_t refinement_paths = 20000;
    int refinement_drop = 4;  // coarse level is L - refinement_drop
    double control_v_scale = 1.1;
    std::size_t utility_samples = 1000000;
    SimOptions sim;
};

ValidationReport run_validation(const ModelParams& params, const RunConfig& config,
                                const ValidationOptions& options = {});

std::string to_json(const ValidationReport& report);

}  // namespace kyle
