#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace arrival {

// In-place complex FFT of a fixed length, unnormalized in both directions
// (backward(forward(x)) == n * x).
//
// Plans are built once under a process-wide lock; executing them is
// thread-safe, so one FftPlan may be shared by any number of threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<std::complex<double>> data) const;
  void backward(std::span<std::complex<double>> data) const;

 private:
  std::size_t n_;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace arrival
