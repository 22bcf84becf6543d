#include "kyle/step_kernel.hpp"

namespace kyle {

bool avx2_available() {
#if defined(KYLE_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

StepKernel select_step_kernel(KernelChoice choice) {
    switch (choice) {
        case KernelChoice::kScalar:
            return &step_scalar;
        case KernelChoice::kAvx2:
        case KernelChoice::kAuto:
            return avx2_available() ? &step_avx2 : &step_scalar;
    }
    return &step_scalar;
}

const char* kernel_name(StepKernel k) { return k == &step_avx2 ? "avx2" : "scalar"; }

}  // namespace kyle
