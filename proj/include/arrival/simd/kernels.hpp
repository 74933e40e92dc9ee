#pragma once
// Data-parallel complex-vector kernels.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA variant chosen at runtime from the CPU feature set. The
// environment variable ARRIVAL_SIMD (scalar | avx2 | auto) overrides the
// choice; it is read once, on first use.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace arrival::simd {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b) noexcept;

// Function table for one backend. Pointers never alias unless noted.
struct KernelTable {
  Backend backend;
  // y[i] *= a[i]   (y may not alias a)
  void (*cmul)(cplx* y, const cplx* a, std::size_t n);
  // y[i] += a[i] * b[i]
  void (*cmul_acc)(cplx* y, const cplx* a, const cplx* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*caxpy)(cplx* y, cplx alpha, const cplx* x, std::size_t n);
  // y[i] *= s
  void (*scale)(cplx* y, double s, std::size_t n);
  // sum conj(a[i]) * b[i]
  cplx (*cdot)(const cplx* a, const cplx* b, std::size_t n);
  // sum |a[i]|^2
  double (*norm2)(const cplx* a, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;

// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_kernels() noexcept;

// Table selected for this process.
const KernelTable& active() noexcept;

// --- span front-ends over the active table ---------------------------------

inline void cmul(std::span<cplx> y, std::span<const cplx> a) {
  active().cmul(y.data(), a.data(), y.size());
}

inline void cmul_acc(std::span<cplx> y, std::span<const cplx> a, std::span<const cplx> b) {
  active().cmul_acc(y.data(), a.data(), b.data(), y.size());
}

inline void caxpy(std::span<cplx> y, cplx alpha, std::span<const cplx> x) {
  active().caxpy(y.data(), alpha, x.data(), y.size());
}

inline void scale(std::span<cplx> y, double s) { active().scale(y.data(), s, y.size()); }

inline cplx cdot(std::span<const cplx> a, std::span<const cplx> b) {
  return active().cdot(a.data(), b.data(), a.size());
}

inline double norm2(std::span<const cplx> a) { return active().norm2(a.data(), a.size()); }

}  // namespace arrival::simd
