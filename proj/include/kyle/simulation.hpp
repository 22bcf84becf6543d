#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kyle/calibration.hpp"
#include "kyle/coefficients.hpp"
#include "kyle/params.hpp"
#include "kyle/step_kernel.hpp"

namespace kyle {

struct TimeGrid {
    std::vector<double> nodes;
    int refinement = 0;

    std::size_t steps() const { return nodes.size() - 1; }
    double t_end() const { return nodes.back(); }
    // Largest node index with nodes[i] <= t (tolerant to rounding).
    std::size_t node_at_or_before(double t) const;
};

// n_steps uniform intervals of width h, then L intervals h/2, ..., h/2^L,
// ending exactly at t_N = T * t_stop_fraction.
TimeGrid build_grid(const RunConfig& config, const ValidatedParams& params);

enum class InsiderMode {
    kEquilibrium,
    kZero,          // X == 0, used to test the wealth bookkeeping
    kMisspecified,  // feedback gain from a calibration with v scaled
};

struct SimOptions {
    InsiderMode insider = InsiderMode::kEquilibrium;
    double insider_v_scale = 1.1;
    KernelChoice kernel = KernelChoice::kAuto;
    unsigned threads = 0;  // 0 = hardware concurrency
    std::size_t block_size = 512;
    std::vector<double> snapshot_times;
};

// Per-step constants for a grid; shared read-only by all paths.
std::vector<StepCoef> build_step_table(const TimeGrid& grid, const Coefficients& market,
                                       const Coefficients& insider, InsiderMode mode);

// Coefficients the insider uses under SimOptions (equal to the market's in equilibrium).
Coefficients insider_coefficients(const ValidatedParams& params, const Calibration& calib,
                                  const SimOptions& options);

struct SimulatedPath {
    TimeGrid grid;
    double xi = 0.0, beta = 0.0, g = 0.0;
    std::vector<double> dz;  // sigma-scaled Brownian increments, one per step
    std::vector<double> chi, zq, mu_p1, mu_p2, x_star, y, price, rn_weight, a1, a2, z;
};

SimulatedPath simulate_path(const ValidatedParams& params, const Calibration& calib, const TimeGrid& grid,
                            std::uint64_t seed, std::uint64_t path_index, const SimOptions& options = {});

// Left-point sums along a stored path.
double wealth(const SimulatedPath& path, const ValidatedParams& params);
double mm_profit(const SimulatedPath& path, const ValidatedParams& params);

// Cross-section of all paths at one grid node.
struct Snapshot {
    double t = 0.0;
    std::size_t node = 0;
    std::vector<double> s1, mu1, mu2, chi, x, z, y, price, logw, int_y_dp, int_xb_dp;
};

struct Ensemble {
    TimeGrid grid;
    std::size_t n_paths = 0;
    double p0 = 0.0;  // P_0, identical across paths
    std::vector<double> xi, beta, g;
    std::vector<Snapshot> snapshots;  // in the order requested
    Snapshot terminal;                // at t_N

    const Snapshot& at(double t) const;
};

Ensemble simulate_ensemble(const ValidatedParams& params, const Calibration& calib, const TimeGrid& grid,
                           std::uint64_t seed, std::size_t n_paths, const SimOptions& options = {});

// Terminal quantities per path, computed from the ensemble accumulators.
double ensemble_wealth(const Ensemble& e, std::size_t i);
double ensemble_mm_profit(const Ensemble& e, std::size_t i);

}  // namespace kyle
