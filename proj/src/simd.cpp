#include "ncdl/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace ncdl::simd {

namespace {

void fma_acc_scalar(double* y, const double* s, const double* z, int m) {
    for (int i = 0; i < m; ++i) y[i] += s[i] * z[i];
}

cd cdot_scalar(const cd* a, const cd* x, int n) {
    double re = 0, im = 0;
    for (int i = 0; i < n; ++i) {
        re += a[i].real() * x[i].real() - a[i].imag() * x[i].imag();
        im += a[i].real() * x[i].imag() + a[i].imag() * x[i].real();
    }
    return {re, im};
}

cd cdotc_scalar(const cd* a, const cd* x, int n) {
    double re = 0, im = 0;
    for (int i = 0; i < n; ++i) {
        re += a[i].real() * x[i].real() + a[i].imag() * x[i].imag();
        im += a[i].real() * x[i].imag() - a[i].imag() * x[i].real();
    }
    return {re, im};
}

const Kernels kScalar{"scalar", fma_acc_scalar, cdot_scalar, cdotc_scalar};

}  // namespace

// defined in simd_avx2.cpp
extern const Kernels kAvx2;

const Kernels& scalar() { return kScalar; }

const Kernels* avx2() {
#if defined(__x86_64__) || defined(__i386__)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const Kernels& active() {
    static const Kernels* k = [] {
        const char* env = std::getenv("NCDL_SIMD");
        if (env && std::strcmp(env, "scalar") == 0) return &kScalar;
        const Kernels* a = avx2();
        return a ? a : &kScalar;
    }();
    return *k;
}

}  // namespace ncdl::simd
