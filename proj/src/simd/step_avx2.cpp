#include "kyle/step_kernel.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace kyle {

#if defined(__AVX2__)

void step_avx2(const StepCoef& c, const PathBlock& b, const double* normals, std::size_t n) {
    const __m256d dt = _mm256_set1_pd(c.dt);
    const __m256d sdt = _mm256_set1_pd(c.sdt);
    const __m256d pc = _mm256_set1_pd(c.p);
    const __m256d r1 = _mm256_set1_pd(c.r1);
    const __m256d r2 = _mm256_set1_pd(c.r2);
    const __m256d g1 = _mm256_set1_pd(c.g1);
    const __m256d g2 = _mm256_set1_pd(c.g2);
    const __m256d gs2dt = _mm256_set1_pd(c.gs2dt);
    const __m256d ng = _mm256_set1_pd(c.neg_gamma);
    const __m256d hg2dt = _mm256_set1_pd(c.hg2dt);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d s1 = _mm256_loadu_pd(b.s1 + i);
        const __m256d mu1 = _mm256_loadu_pd(b.mu1 + i);
        const __m256d mu2 = _mm256_loadu_pd(b.mu2 + i);
        const __m256d e1 = _mm256_sub_pd(s1, mu1);
        const __m256d e2 = _mm256_sub_pd(_mm256_loadu_pd(b.xi + i), mu2);
        const __m256d dx = _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(g1, e1), _mm256_mul_pd(g2, e2)), dt);
        const __m256d dz = _mm256_mul_pd(sdt, _mm256_loadu_pd(normals + i));
        const __m256d dy = _mm256_add_pd(dx, dz);
        const __m256d p_old = _mm256_loadu_pd(b.price + i);
        const __m256d dp = _mm256_mul_pd(pc, dy);
        const __m256d p_new = _mm256_add_pd(p_old, dp);

        const __m256d x = _mm256_loadu_pd(b.x + i);
        const __m256d y = _mm256_loadu_pd(b.y + i);
        _mm256_storeu_pd(b.int_y_dp + i, _mm256_add_pd(_mm256_loadu_pd(b.int_y_dp + i), _mm256_mul_pd(y, dp)));
        const __m256d xb = _mm256_add_pd(x, _mm256_loadu_pd(b.beta + i));
        _mm256_storeu_pd(b.int_xb_dp + i, _mm256_add_pd(_mm256_loadu_pd(b.int_xb_dp + i), _mm256_mul_pd(xb, dp)));
        const __m256d lw = _mm256_sub_pd(_mm256_mul_pd(_mm256_mul_pd(ng, p_old), dz),
                                          _mm256_mul_pd(hg2dt, _mm256_mul_pd(p_old, p_old)));
        _mm256_storeu_pd(b.logw + i, _mm256_add_pd(_mm256_loadu_pd(b.logw + i), lw));

        const __m256d drift = _mm256_mul_pd(gs2dt, p_new);
        _mm256_storeu_pd(b.chi + i, _mm256_add_pd(_mm256_add_pd(_mm256_loadu_pd(b.chi + i), dy), drift));
        _mm256_storeu_pd(b.s1 + i, _mm256_add_pd(_mm256_add_pd(s1, drift), dz));
        _mm256_storeu_pd(b.mu1 + i, _mm256_add_pd(_mm256_add_pd(mu1, _mm256_mul_pd(r1, dy)), drift));
        _mm256_storeu_pd(b.mu2 + i, _mm256_add_pd(mu2, _mm256_mul_pd(r2, dy)));
        _mm256_storeu_pd(b.x + i, _mm256_add_pd(x, dx));
        _mm256_storeu_pd(b.z + i, _mm256_add_pd(_mm256_loadu_pd(b.z + i), dz));
        _mm256_storeu_pd(b.y + i, _mm256_add_pd(y, dy));
        _mm256_storeu_pd(b.price + i, p_new);
    }
    if (i < n) {
        PathBlock tail = b;
        tail.s1 += i; tail.mu1 += i; tail.mu2 += i; tail.chi += i; tail.x += i; tail.z += i;
        tail.y += i; tail.price += i; tail.logw += i; tail.int_y_dp += i; tail.int_xb_dp += i;
        tail.xi += i; tail.beta += i;
        step_scalar(c, tail, normals + i, n - i);
    }
}

#else

void step_avx2(const StepCoef& c, const PathBlock& b, const double* normals, std::size_t n) {
    step_scalar(c, b, normals, n);
}

#endif

}  // namespace kyle
