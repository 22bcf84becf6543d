#pragma once

#include <cstddef>

namespace kyle {

// Per-step constants shared by every path in a block.
struct StepCoef {
    double dt;
    double sdt;      // sigma sqrt(dt)
    double p;        // price impact at the left node
    double r1, r2;   // public filter gain
    double g1, g2;   // insider feedback gain sigma^2 Sigma^-1 (r - e1)
    double gs2dt;    // gamma sigma^2 dt
    double neg_gamma;
    double hg2dt;    // gamma^2 sigma^2 dt / 2
};

// Structure-of-arrays state for a block of paths.
struct PathBlock {
    double* s1;    // Z^Q - beta
    double* mu1;
    double* mu2;
    double* chi;
    double* x;
    double* z;
    double* y;
    double* price;
    double* logw;
    double* int_y_dp;
    double* int_xb_dp;
    const double* xi;
    const double* beta;
};

using StepKernel = void (*)(const StepCoef& c, const PathBlock& b, const double* normals, std::size_t n);

void step_scalar(const StepCoef& c, const PathBlock& b, const double* normals, std::size_t n);
void step_avx2(const StepCoef& c, const PathBlock& b, const double* normals, std::size_t n);

enum class KernelChoice { kAuto, kScalar, kAvx2 };

bool avx2_available();
// kAvx2 falls back to scalar when the CPU or the build lacks AVX2.
StepKernel select_step_kernel(KernelChoice choice = KernelChoice::kAuto);
const char* kernel_name(StepKernel k);

}  // namespace kyle
