#include "arrival/states.hpp"

#include <cmath>

#include "arrival/error.hpp"

namespace arrival::states {

void GaussianSpec::validate() const {
  require(std::isfinite(q0) && q0 > 0.0, "gaussian: q0 must be positive");
  require(std::isfinite(p0) && p0 < 0.0, "gaussian: p0 must be negative");
  require(std::isfinite(sigma) && sigma > 0.0, "gaussian: sigma must be positive");
  require(q0 >= 5.0 * sigma, "gaussian: q0 < 5 sigma, left-tail leakage guard violated");
}

WaveFunction wave_packet(double q0, double p0, double sigma, const GridPtr& grid) {
  require(std::isfinite(sigma) && sigma > 0.0, "wave_packet: sigma must be positive");
  require(std::abs(p0) + 4.0 / (2.0 * sigma) < grid->p_max(),
          "wave_packet: momentum support exceeds the grid Nyquist bound");
  std::vector<cplx> amps(grid->size());
  const double inv4s2 = 1.0 / (4.0 * sigma * sigma);
  for (std::size_t j = 0; j < amps.size(); ++j) {
    const double x = grid->x(j);
    const double d = x - q0;
    amps[j] = std::polar(std::exp(-d * d * inv4s2), p0 * x);
  }
  WaveFunction psi(grid, std::move(amps));
  const double n = psi.norm();
  require(n > 0.0, "wave_packet: packet does not overlap the grid");
  psi *= 1.0 / n;
  return psi;
}

WaveFunction gaussian(const GaussianSpec& spec, const GridPtr& grid) {
  spec.validate();
  return wave_packet(spec.q0, spec.p0, spec.sigma, grid);
}

WaveFunction superpose(const std::vector<std::pair<cplx, WaveFunction>>& terms) {
  require(!terms.empty(), "superpose: no terms");
  WaveFunction out = WaveFunction::zeros(terms.front().second.grid_ptr());
  for (const auto& [c, psi] : terms) out.add_scaled(c, psi);
  const double n = out.norm();
  require(n > 1e-12, "superpose: superposition has zero norm");
  out *= 1.0 / n;
  return out;
}

double negative_momentum_fraction(const WaveFunction& psi) {
  const auto spec = qgrid::to_momentum(psi);
  double neg = 0.0, total = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double w = std::norm(spec[j]);
    total += w;
    if (psi.grid().momentum(j) < 0.0) neg += w;
  }
  return total > 0.0 ? neg / total : 0.0;
}

MomentumMoments momentum_moments(const WaveFunction& psi) {
  const auto spec = qgrid::to_momentum(psi);
  double total = 0.0, mean = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double w = std::norm(spec[j]);
    total += w;
    mean += w * psi.grid().momentum(j);
  }
  mean /= total;
  double var = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double d = psi.grid().momentum(j) - mean;
    var += std::norm(spec[j]) * d * d;
  }
  return {mean, std::sqrt(var / total)};
}

}  // namespace arrival::states
