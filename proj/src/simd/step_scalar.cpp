#include "kyle/step_kernel.hpp"

namespace kyle {

// Reference kernel. The AVX2 variant performs the same operations in the
// same order; both are built with -ffp-contract=off so results match bitwise.
void step_scalar(const StepCoef& c, const PathBlock& b, const double* normals, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double e1 = b.s1[i] - b.mu1[i];
        const double e2 = b.xi[i] - b.mu2[i];
        const double dx = (c.g1 * e1 + c.g2 * e2) * c.dt;
        const double dz = c.sdt * normals[i];
        const double dy = dx + dz;
        const double p_old = b.price[i];
        const double dp = c.p * dy;
        const double p_new = p_old + dp;

        b.int_y_dp[i] = b.int_y_dp[i] + b.y[i] * dp;
        b.int_xb_dp[i] = b.int_xb_dp[i] + (b.x[i] + b.beta[i]) * dp;
        b.logw[i] = b.logw[i] + ((c.neg_gamma * p_old) * dz - c.hg2dt * (p_old * p_old));

        // P is constant on (t_n, t_{n+1}] once the order-flow jump is in.
        const double drift = c.gs2dt * p_new;
        b.chi[i] = (b.chi[i] + dy) + drift;
        b.s1[i] = (b.s1[i] + drift) + dz;
        b.mu1[i] = (b.mu1[i] + c.r1 * dy) + drift;
        b.mu2[i] = b.mu2[i] + c.r2 * dy;
        b.x[i] = b.x[i] + dx;
        b.z[i] = b.z[i] + dz;
        b.y[i] = b.y[i] + dy;
        b.price[i] = p_new;
    }
}

}  // namespace kyle
