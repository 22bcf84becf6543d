#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "kyle/linalg.hpp"

namespace kyle {

// Defaults are the reference parameter set used by the acceptance suite.
struct ModelParams {
    double sigma = 1.0;       // noise-trader volatility
    double horizon = 1.0;     // T
    double sigma_xi = 1.0;    // prior std of the signal
    double sigma_beta = 0.5;  // std of the initial endowment
    double eps = 0.2;         // variance of the observation noise G
    double gamma = 0.5;       // CARA risk aversion
    double m_xi = 0.0;
    double m_beta = 0.0;
};

struct StructVectors {
    Vec2 u;   // (eps*gamma*(sigma^2 T + sigma_beta^2), sigma_xi^2)
    Vec2 w;   // (eps*gamma, 1)
    Vec2 v;   // (1, -eps*gamma)
    Vec2 e1{1.0, 0.0};
};

struct ValidatedParams {
    ModelParams raw;
    double sigma_e = 0.0;
    double eg = 0.0;         // eps*gamma, appears everywhere
    double var_z_t = 0.0;    // sigma^2 T + sigma_beta^2
    StructVectors vec;
};

ValidatedParams validate(const ModelParams& params);

struct RunConfig {
    std::uint64_t n_paths = 100000;
    std::uint64_t n_steps = 4000;
    int grid_refinement = 16;
    std::uint64_t seed = 42;
    double t_stop_fraction = 1.0 - 0x1p-20;
};

void validate(const RunConfig& config);

// Flat key/value config. Lines are "key = value"; '#' starts a comment.
// Unknown keys raise DomainError naming the key.
void apply_setting(const std::string& key, const std::string& value, ModelParams& params,
                   RunConfig& config);
void load_config(std::istream& in, ModelParams& params, RunConfig& config);
void load_config_file(const std::string& path, ModelParams& params, RunConfig& config);

}  // namespace kyle
