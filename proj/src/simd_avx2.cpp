// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "ncdl/simd.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace ncdl::simd {

namespace {

void fma_acc_avx2(double* y, const double* s, const double* z, int m) {
    int i = 0;
    for (; i + 8 <= m; i += 8) {
        __m256d y0 = _mm256_loadu_pd(y + i), y1 = _mm256_loadu_pd(y + i + 4);
        y0 = _mm256_fmadd_pd(_mm256_loadu_pd(s + i), _mm256_loadu_pd(z + i), y0);
        y1 = _mm256_fmadd_pd(_mm256_loadu_pd(s + i + 4), _mm256_loadu_pd(z + i + 4), y1);
        _mm256_storeu_pd(y + i, y0);
        _mm256_storeu_pd(y + i + 4, y1);
    }
    for (; i + 4 <= m; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(_mm256_loadu_pd(s + i), _mm256_loadu_pd(z + i), _mm256_loadu_pd(y + i)));
    for (; i < m; ++i) y[i] += s[i] * z[i];
}

// acc_p holds (ar*xr, ai*xi) pairs, acc_q holds (ar*xi, ai*xr) pairs.
template <bool Conj>
cd dot_impl(const cd* a, const cd* x, int n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* px = reinterpret_cast<const double*>(x);
    __m256d acc_p = _mm256_setzero_pd(), acc_q = _mm256_setzero_pd();
    int i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vx = _mm256_loadu_pd(px + 2 * i);
        acc_p = _mm256_fmadd_pd(va, vx, acc_p);
        acc_q = _mm256_fmadd_pd(va, _mm256_permute_pd(vx, 0b0101), acc_q);
    }
    alignas(32) double p[4], q[4];
    _mm256_store_pd(p, acc_p);
    _mm256_store_pd(q, acc_q);
    double re, im;
    if constexpr (Conj) {
        re = (p[0] + p[2]) + (p[1] + p[3]);
        im = (q[0] + q[2]) - (q[1] + q[3]);
    } else {
        re = (p[0] + p[2]) - (p[1] + p[3]);
        im = (q[0] + q[2]) + (q[1] + q[3]);
    }
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = Conj ? -a[i].imag() : a[i].imag();
        re += ar * x[i].real() - ai * x[i].imag();
        im += ar * x[i].imag() + ai * x[i].real();
    }
    return {re, im};
}

cd cdot_avx2(const cd* a, const cd* x, int n) { return dot_impl<false>(a, x, n); }
cd cdotc_avx2(const cd* a, const cd* x, int n) { return dot_impl<true>(a, x, n); }

}  // namespace

extern const Kernels kAvx2;
const Kernels kAvx2{"avx2", fma_acc_avx2, cdot_avx2, cdotc_avx2};

}  // namespace ncdl::simd

#else

namespace ncdl::simd {
extern const Kernels kAvx2;
const Kernels kAvx2 = scalar();
}  // namespace ncdl::simd

#endif
