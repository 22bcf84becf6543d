#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <vector>

#include "kyle/step_kernel.hpp"

namespace kyle {
namespace {

struct Soa {
    explicit Soa(std::size_t n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        for (auto* v : fields()) {
            v->resize(n);
            for (double& x : *v) x = g(rng);
        }
        xi.resize(n);
        beta.resize(n);
        for (double& x : xi) x = g(rng);
        for (double& x : beta) x = g(rng);
    }
    std::vector<std::vector<double>*> fields() {
        return {&s1, &mu1, &mu2, &chi, &x, &z, &y, &price, &logw, &int_y_dp, &int_xb_dp};
    }
    PathBlock block() {
        return {s1.data(), mu1.data(), mu2.data(), chi.data(), x.data(), z.data(), y.data(), price.data(),
                logw.data(), int_y_dp.data(), int_xb_dp.data(), xi.data(), beta.data()};
    }
    std::vector<double> s1, mu1, mu2, chi, x, z, y, price, logw, int_y_dp, int_xb_dp, xi, beta;
};

StepCoef coef(double dt) {
    return {dt, std::sqrt(dt), 0.81, 0.12, 0.97, -0.4, 0.65, 0.5 * dt, -0.5, 0.125 * dt};
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {};

TEST_P(KernelEquivalence, BitIdenticalOverManySteps) {
    if (!avx2_available()) GTEST_SKIP() << "no AVX2 on this CPU";
    const std::size_t n = GetParam();
    Soa a(n, 5), b(n, 5);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    std::vector<double> normals(n);
    for (int step = 0; step < 200; ++step) {
        for (double& z : normals) z = g(rng);
        const StepCoef c = coef(1e-3 * (1.0 + step % 7));
        step_scalar(c, a.block(), normals.data(), n);
        step_avx2(c, b.block(), normals.data(), n);
    }
    auto fa = a.fields();
    auto fb = b.fields();
    for (std::size_t k = 0; k < fa.size(); ++k) EXPECT_TRUE(bit_equal(*fa[k], *fb[k])) << "field " << k;
}

// widths that exercise the 4-lane body, the scalar tail and both together
INSTANTIATE_TEST_SUITE_P(Widths, KernelEquivalence, ::testing::Values(1, 3, 4, 5, 8, 13, 512, 1023));

TEST(Kernel, ScalarStepArithmetic) {
    Soa a(1, 1);
    const double s1 = a.s1[0], mu1 = a.mu1[0], mu2 = a.mu2[0], xi = a.xi[0], p0 = a.price[0];
    const StepCoef c = coef(0.01);
    const double nrm = 0.3;
    step_scalar(c, a.block(), &nrm, 1);
    const double dx = (c.g1 * (s1 - mu1) + c.g2 * (xi - mu2)) * c.dt;
    const double dz = c.sdt * nrm;
    const double p1 = p0 + c.p * (dx + dz);
    EXPECT_DOUBLE_EQ(a.price[0], p1);
    EXPECT_DOUBLE_EQ(a.s1[0], s1 + c.gs2dt * p1 + dz);
    EXPECT_DOUBLE_EQ(a.mu2[0], mu2 + c.r2 * (dx + dz));
}

TEST(Kernel, Dispatch) {
    EXPECT_EQ(select_step_kernel(KernelChoice::kScalar), &step_scalar);
    EXPECT_STREQ(kernel_name(&step_scalar), "scalar");
    const StepKernel k = select_step_kernel(KernelChoice::kAvx2);
    if (avx2_available()) {
        EXPECT_EQ(k, &step_avx2);
        EXPECT_STREQ(kernel_name(k), "avx2");
        EXPECT_EQ(select_step_kernel(KernelChoice::kAuto), &step_avx2);
    } else {
        EXPECT_EQ(k, &step_scalar);
        EXPECT_EQ(select_step_kernel(KernelChoice::kAuto), &step_scalar);
    }
}

}  // namespace
}  // namespace kyle
