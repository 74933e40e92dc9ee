#include "arrival/current.hpp"

#include <cmath>

#include "arrival/error.hpp"
#include "arrival/simd/kernels.hpp"

namespace arrival::current {
namespace {

double current_from_spectrum(const qgrid::Grid& grid, std::span<const qgrid::cplx> spec) {
  const qgrid::cplx value = simd::cdot(grid.origin_value_weights(), spec);
  const qgrid::cplx slope = simd::cdot(grid.origin_slope_weights(), spec);
  return -(std::conj(value) * slope).imag() / grid.mass();
}

}  // namespace

double current_at_origin(const WaveFunction& psi_t) {
  return current_from_spectrum(psi_t.grid(), qgrid::to_momentum(psi_t));
}

CurrentTrace current_trace(const WaveFunction& psi0, double t1, double t2, double dt) {
  require(t2 > t1, "integrated_current: t2 must exceed t1");
  require(dt > 0.0, "integrated_current: dt must be positive");
  auto steps = static_cast<std::size_t>(std::ceil((t2 - t1) / dt - 1e-9));
  if (steps < 2) steps = 2;
  if (steps % 2 != 0) ++steps;
  const double h = (t2 - t1) / static_cast<double>(steps);

  const auto& grid = psi0.grid();
  const auto spec0 = qgrid::to_momentum(psi0);
  std::vector<qgrid::cplx> spec(spec0.size());
  CurrentTrace trace;
  trace.dt = h;
  trace.times.reserve(steps + 1);
  trace.J.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = (i == steps) ? t2 : t1 + static_cast<double>(i) * h;
    std::copy(spec0.begin(), spec0.end(), spec.begin());
    simd::cmul(spec, qgrid::free_phase(grid, t));
    trace.times.push_back(t);
    trace.J.push_back(current_from_spectrum(grid, spec));
  }
  return trace;
}

double simpson(const CurrentTrace& trace) {
  const std::size_t n = trace.J.size() - 1;
  require(n >= 2 && n % 2 == 0, "simpson: need an even number of intervals");
  double s = trace.J.front() + trace.J.back();
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * trace.J[i];
  return s * trace.dt / 3.0;
}

double integrated_current(const WaveFunction& psi0, double t1, double t2, double dt) {
  return simpson(current_trace(psi0, t1, t2, dt));
}

double semiclassical_crossing_probability(const WaveFunction& psi0, double t1, double t2) {
  require(t2 >= t1, "semiclassical_crossing_probability: t2 must not precede t1");
  if (t1 == t2) return 0.0;
  return qgrid::positive_norm2(qgrid::free_evolve(psi0, t1)) -
         qgrid::positive_norm2(qgrid::free_evolve(psi0, t2));
}

}  // namespace arrival::current
