#pragma once

#include <array>
#include <cstdint>

namespace kyle {

// Philox4x32-10. Counter-based: every path owns an
// independent stream addressed by (seed, path_index) with no shared state.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    static Block round10(Block ctr, std::array<std::uint32_t, 2> key);
};

// Standard normals for one path. Draw order is part of the reproducibility
// contract: Xi, beta, G, then one normal per time step.
class PathRng {
public:
    PathRng() = default;
    PathRng(std::uint64_t seed, std::uint64_t path_index);

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Marsaglia polar method; the second variate of each pair is cached.
    double normal();

private:
    std::uint64_t next_u64();

    std::array<std::uint32_t, 2> key_{};
    Philox4x32::Block ctr_{};
    Philox4x32::Block buf_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace kyle
