#pragma once

#include <complex>
#include <string_view>

namespace ncdl::simd {

using cd = std::complex<double>;

// The three inner loops that dominate operator application. Arrays of doubles are
// interleaved complex (re, im, re, im, ...); m counts doubles.
struct Kernels {
    std::string_view name;
    // y[i] += s[i] * z[i]   (s is a real stencil duplicated per re/im slot)
    void (*fma_acc)(double* y, const double* s, const double* z, int m);
    // Σ a[i] x[i]
    cd (*cdot)(const cd* a, const cd* x, int n);
    // Σ conj(a[i]) x[i]
    cd (*cdotc)(const cd* a, const cd* x, int n);
};

const Kernels& scalar();
// nullptr when the CPU lacks AVX2+FMA.
const Kernels* avx2();
// Chosen once: AVX2 when available unless NCDL_SIMD=scalar is set.
const Kernels& active();

}  // namespace ncdl::simd
