// Scalar reference vs AVX2 variants, and both vs a naive std::complex loop.

#include <doctest.h>

#include <random>

#include "arrival/simd/kernels.hpp"
#include "support/oracles.hpp"

using arrival::simd::cplx;
using arrival::simd::KernelTable;

namespace {

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 31, 64, 1000, 4097};

std::vector<const KernelTable*> tables() {
  std::vector<const KernelTable*> t{&arrival::simd::scalar_kernels()};
  if (const auto* a = arrival::simd::avx2_kernels()) t.push_back(a);
  return t;
}

double scale_of(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i]) * std::abs(b[i]);
  return s + 1e-300;
}

}  // namespace

TEST_CASE("elementwise kernels match the naive complex loop") {
  std::mt19937_64 rng(7);
  for (const auto* t : tables()) {
    CAPTURE(arrival::simd::backend_name(t->backend));
    for (std::size_t n : kSizes) {
      CAPTURE(n);
      const auto a = oracle::random_vector(n, rng);
      const auto b = oracle::random_vector(n, rng);
      const auto y0 = oracle::random_vector(n, rng);
      const cplx alpha{0.3, -1.7};

      auto y = y0;
      t->cmul(y.data(), a.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] - y0[i] * a[i]) < 1e-14 * (1 + std::abs(y[i])));

      y = y0;
      t->cmul_acc(y.data(), a.data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(y[i] - (y0[i] + a[i] * b[i])) < 1e-14 * (1 + std::abs(y[i])));

      y = y0;
      t->caxpy(y.data(), alpha, a.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(y[i] - (y0[i] + alpha * a[i])) < 1e-14 * (1 + std::abs(y[i])));

      y = y0;
      t->scale(y.data(), -2.5, n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == y0[i] * -2.5);
    }
  }
}

TEST_CASE("reductions match the naive loop up to summation order") {
  std::mt19937_64 rng(11);
  for (const auto* t : tables()) {
    CAPTURE(arrival::simd::backend_name(t->backend));
    for (std::size_t n : kSizes) {
      CAPTURE(n);
      const auto a = oracle::random_vector(n, rng);
      const auto b = oracle::random_vector(n, rng);
      cplx dot{};
      double nrm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dot += std::conj(a[i]) * b[i];
        nrm += std::norm(a[i]);
      }
      CHECK(std::abs(t->cdot(a.data(), b.data(), n) - dot) <= 1e-14 * scale_of(a, b));
      CHECK(std::abs(t->norm2(a.data(), n) - nrm) <= 1e-14 * (nrm + 1e-300));
    }
  }
}

TEST_CASE("avx2 and scalar variants agree on identical inputs") {
  const auto* avx = arrival::simd::avx2_kernels();
  if (avx == nullptr) {
    MESSAGE("AVX2 variant unavailable on this machine; equivalence not exercised");
    return;
  }
  const auto& sc = arrival::simd::scalar_kernels();
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 3000)(rng);
    const auto a = oracle::random_vector(n, rng);
    const auto b = oracle::random_vector(n, rng);
    auto y1 = oracle::random_vector(n, rng);
    auto y2 = y1;
    sc.cmul_acc(y1.data(), a.data(), b.data(), n);
    avx->cmul_acc(y2.data(), a.data(), b.data(), n);
    CHECK(oracle::max_abs_diff(y1, y2) < 1e-13);
    sc.cmul(y1.data(), a.data(), n);
    avx->cmul(y2.data(), a.data(), n);
    CHECK(oracle::max_abs_diff(y1, y2) < 1e-13);
    const cplx d1 = sc.cdot(a.data(), b.data(), n), d2 = avx->cdot(a.data(), b.data(), n);
    CHECK(std::abs(d1 - d2) <= 1e-14 * scale_of(a, b));
    CHECK(std::abs(sc.norm2(a.data(), n) - avx->norm2(a.data(), n)) <=
          1e-14 * (sc.norm2(a.data(), n) + 1e-300));
  }
}

TEST_CASE("active table honours the hardware and reports a backend") {
  const auto& t = arrival::simd::active();
  if (arrival::simd::avx2_kernels() == nullptr) CHECK(t.backend == arrival::simd::Backend::scalar);
  CHECK(!arrival::simd::backend_name(t.backend).empty());
}
