#include "arrival/timescales.hpp"

#include <algorithm>
#include <cmath>

#include "arrival/error.hpp"

namespace arrival::timescales {
namespace {

// Comparisons against thresholds tolerate representation error in products
// like 5 * 0.4.
bool at_least(double value, double bound) { return value >= bound * (1.0 - 1e-12); }

}  // namespace

double zeno_time_general(const qgrid::WaveFunction& psi) {
  const auto spec = qgrid::to_momentum(psi);
  const auto& grid = psi.grid();
  double total = 0.0, mean = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double k = grid.momentum(j);
    const double w = std::norm(spec[j]);
    total += w;
    mean += w * k * k / (2.0 * grid.mass());
  }
  require(total > 0.0, "zeno_time_general: zero state");
  mean /= total;
  double var = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double k = grid.momentum(j);
    const double d = k * k / (2.0 * grid.mass()) - mean;
    var += std::norm(spec[j]) * d * d;
  }
  var /= total;
  const double spread = std::sqrt(var);
  require(spread > 1e-9 * (std::abs(mean) + grid.dk() * grid.dk()),
          "zeno_time_general: energy spread vanishes, Zeno time undefined");
  return 1.0 / spread;
}

double arrival_time(const states::GaussianSpec& spec, double mass) {
  return mass * spec.q0 / std::abs(spec.p0);
}

double zeno_time_packet(const states::GaussianSpec& spec, double mass) {
  return mass * spec.sigma / std::abs(spec.p0);
}

TimescaleReport regime_check(const states::GaussianSpec& spec,
                             const histories::HistoryPartition& part, double mass,
                             const RegimeThresholds& thresholds) {
  spec.validate();
  TimescaleReport rep;
  rep.arrival_time = arrival_time(spec, mass);
  rep.zeno_time = zeno_time_packet(spec, mass);
  rep.delta = part.delta();
  rep.momentum_peaking = std::abs(spec.p0) * spec.sigma;

  const double ta = rep.arrival_time;
  if (part.n_intervals() > 0 && ta >= part.boundary(0) && ta <= part.boundary(part.n_intervals())) {
    auto a = static_cast<std::size_t>(std::floor((ta - part.start) / part.delta()));
    a = std::min(a, part.n_intervals() - 1);
    rep.interval = a;
    rep.margin = std::min(ta - part.boundary(a), part.boundary(a + 1) - ta) / rep.zeno_time;
  }
  rep.delta_ok = at_least(rep.delta, thresholds.delta_over_tz * rep.zeno_time);
  rep.margin_ok = rep.interval.has_value() && at_least(rep.margin, thresholds.margin_tz);
  rep.peaking_ok = at_least(rep.momentum_peaking, thresholds.momentum_peaking);
  rep.regime_ok = rep.delta_ok && rep.margin_ok && rep.peaking_ok;
  return rep;
}

}  // namespace arrival::timescales
