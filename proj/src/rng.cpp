#include "kyle/rng.hpp"

#include <cmath>

namespace kyle {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

}  // namespace

Philox4x32::Block Philox4x32::round10(Block c, std::array<std::uint32_t, 2> k) {
    for (int r = 0; r < 10; ++r) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

PathRng::PathRng(std::uint64_t seed, std::uint64_t path_index) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    ctr_ = {0u, 0u, static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32)};
}

std::uint64_t PathRng::next_u64() {
    if (used_ >= 4) {
        buf_ = Philox4x32::round10(ctr_, key_);
        if (++ctr_[0] == 0) ++ctr_[1];
        used_ = 0;
    }
    const std::uint64_t hi = buf_[used_];
    const std::uint64_t lo = buf_[used_ + 1];
    used_ += 2;
    return (hi << 32) | lo;
}

double PathRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

double PathRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double a, b, s;
    do {
        a = 2.0 * uniform() - 1.0;
        b = 2.0 * uniform() - 1.0;
        s = a * a + b * b;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = b * scale;
    has_spare_ = true;
    return a * scale;
}

}  // namespace kyle
