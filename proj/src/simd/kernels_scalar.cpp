#include "arrival/simd/kernels.hpp"

// Reference kernels. Products are spelled out component-wise so that the
// compiler does not route them through the C99 Annex G helpers.

namespace arrival::simd {
namespace {

void cmul_scalar(cplx* y, const cplx* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double yr = y[i].real(), yi = y[i].imag();
    const double ar = a[i].real(), ai = a[i].imag();
    y[i] = {yr * ar - yi * ai, yi * ar + yr * ai};
  }
}

void cmul_acc_scalar(cplx* y, const cplx* a, const cplx* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    y[i] += cplx{ar * br - ai * bi, ai * br + ar * bi};
  }
}

void caxpy_scalar(cplx* y, cplx alpha, const cplx* x, std::size_t n) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cplx{ar * xr - ai * xi, ai * xr + ar * xi};
  }
}

void scale_scalar(cplx* y, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = {y[i].real() * s, y[i].imag() * s};
}

cplx cdot_scalar(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double norm2_scalar(const cplx* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return s;
}

constexpr KernelTable kScalar{Backend::scalar, cmul_scalar, cmul_acc_scalar, caxpy_scalar,
                              scale_scalar,    cdot_scalar, norm2_scalar};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace arrival::simd
