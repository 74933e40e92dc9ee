#include "arrival/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "arrival/error.hpp"

namespace arrival {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  require(n > 0, "FftPlan: length must be positive");
  // FFTW_ESTIMATE keeps plan selection deterministic; FFTW_UNALIGNED lets the
  // plans run on arbitrary std::vector storage through the new-array API.
  std::vector<std::complex<double>> scratch(n);
  const std::lock_guard lock(planner_mutex());
  const int len = static_cast<int>(n);
  forward_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  backward_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()),
                               FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (forward_ == nullptr || backward_ == nullptr) throw NumericalError("fftw planning failed");
}

FftPlan::~FftPlan() {
  const std::lock_guard lock(planner_mutex());
  if (forward_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
  require(data.size() == n_, "FftPlan::forward: length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(forward_), as_fftw(data.data()), as_fftw(data.data()));
}

void FftPlan::backward(std::span<std::complex<double>> data) const {
  require(data.size() == n_, "FftPlan::backward: length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(backward_), as_fftw(data.data()), as_fftw(data.data()));
}

}  // namespace arrival
