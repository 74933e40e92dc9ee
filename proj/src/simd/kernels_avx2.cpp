// AVX2/FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here may run before the dispatcher has checked cpuid.

#include <immintrin.h>

#include "arrival/simd/kernels.hpp"

namespace arrival::simd {
namespace {

// Two complex doubles per register: [re0 im0 re1 im1].
inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline __m256d mul2(__m256d x, __m256d a) {
  const __m256d ar = _mm256_movedup_pd(a);          // [ar ar]
  const __m256d ai = _mm256_permute_pd(a, 0b1111);  // [ai ai]
  const __m256d xs = _mm256_permute_pd(x, 0b0101);  // [xi xr]
  return _mm256_fmaddsub_pd(x, ar, _mm256_mul_pd(xs, ai));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void cmul_avx2(cplx* y, const cplx* a, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(y + i, mul2(load2(y + i), load2(a + i)));
  for (; i < n; ++i) {
    const double yr = y[i].real(), yi = y[i].imag();
    y[i] = {yr * a[i].real() - yi * a[i].imag(), yi * a[i].real() + yr * a[i].imag()};
  }
}

void cmul_acc_avx2(cplx* y, const cplx* a, const cplx* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    store2(y + i, _mm256_add_pd(load2(y + i), mul2(load2(a + i), load2(b + i))));
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    y[i] += cplx{ar * b[i].real() - ai * b[i].imag(), ai * b[i].real() + ar * b[i].imag()};
  }
}

void caxpy_avx2(cplx* y, cplx alpha, const cplx* x, std::size_t n) {
  const __m256d al = _mm256_setr_pd(alpha.real(), alpha.imag(), alpha.real(), alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(y + i, _mm256_add_pd(load2(y + i), mul2(load2(x + i), al)));
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cplx{alpha.real() * xr - alpha.imag() * xi, alpha.imag() * xr + alpha.real() * xi};
  }
}

void scale_avx2(cplx* y, double s, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(y + i, _mm256_mul_pd(load2(y + i), sv));
  for (; i < n; ++i) y[i] = {y[i].real() * s, y[i].imag() * s};
}

cplx cdot_avx2(const cplx* a, const cplx* b, std::size_t n) {
  // prod = a*b lane-wise gives [ar*br, ai*bi]; with b swapped, [ar*bi, ai*br].
  __m256d re0 = _mm256_setzero_pd(), re1 = _mm256_setzero_pd();
  __m256d im0 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = load2(a + i), b0 = load2(b + i);
    const __m256d a1 = load2(a + i + 2), b1 = load2(b + i + 2);
    re0 = _mm256_fmadd_pd(a0, b0, re0);
    re1 = _mm256_fmadd_pd(a1, b1, re1);
    im0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(b0, 0b0101), im0);
    im1 = _mm256_fmadd_pd(a1, _mm256_permute_pd(b1, 0b0101), im1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d a0 = load2(a + i), b0 = load2(b + i);
    re0 = _mm256_fmadd_pd(a0, b0, re0);
    im0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(b0, 0b0101), im0);
  }
  const __m256d sign = _mm256_setr_pd(1.0, -1.0, 1.0, -1.0);
  double re = hsum(_mm256_add_pd(re0, re1));
  double im = hsum(_mm256_mul_pd(_mm256_add_pd(im0, im1), sign));
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

double norm2_avx2(const cplx* a, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = load2(a + i), v1 = load2(a + i + 2);
    s0 = _mm256_fmadd_pd(v0, v0, s0);
    s1 = _mm256_fmadd_pd(v1, v1, s1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d v0 = load2(a + i);
    s0 = _mm256_fmadd_pd(v0, v0, s0);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return s;
}

constexpr KernelTable kAvx2{Backend::avx2, cmul_avx2, cmul_acc_avx2, caxpy_avx2,
                            scale_avx2,    cdot_avx2, norm2_avx2};

}  // namespace

const KernelTable& avx2_table() noexcept { return kAvx2; }

}  // namespace arrival::simd
