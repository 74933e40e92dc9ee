#pragma once
// Arrival and Zeno timescales and the regime in which the semiclassical
// class operators are expected to decohere.

#include <cstddef>
#include <optional>

#include "arrival/histories.hpp"
#include "arrival/qgrid.hpp"
#include "arrival/states.hpp"

namespace arrival::timescales {

// 1 / sqrt(<H^2> - <H>^2), H = p^2/2m evaluated on the momentum lattice.
// Throws PreconditionError when the energy spread vanishes.
double zeno_time_general(const qgrid::WaveFunction& psi);

// m q0 / |p0|
double arrival_time(const states::GaussianSpec& spec, double mass = 1.0);
// m sigma / |p0|, the time the packet takes to move one width.
double zeno_time_packet(const states::GaussianSpec& spec, double mass = 1.0);

struct RegimeThresholds {
  double delta_over_tz = 5.0;  // Delta >= 5 t_z
  double margin_tz = 2.0;      // t_a at least 2 t_z from its interval edges
  double momentum_peaking = 10.0;  // |p0| sigma >= 10
};

struct TimescaleReport {
  double arrival_time = 0.0;
  double zeno_time = 0.0;  // packet form
  std::optional<double> zeno_time_general;
  double delta = 0.0;
  double momentum_peaking = 0.0;
  std::optional<std::size_t> interval;  // coarse interval holding t_a
  double margin = 0.0;  // distance of t_a to the nearest edge of that interval, in t_z
  bool delta_ok = false;
  bool margin_ok = false;
  bool peaking_ok = false;
  bool regime_ok = false;
};

TimescaleReport regime_check(const states::GaussianSpec& spec,
                             const histories::HistoryPartition& part, double mass = 1.0,
                             const RegimeThresholds& thresholds = {});

}  // namespace arrival::timescales
