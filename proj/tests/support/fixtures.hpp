#pragma once

#include "arrival/qgrid.hpp"
#include "arrival/states.hpp"

namespace fixture {

// N = 4096 on [-400, 400): dx = 0.1953125, p_max ~ 16.08.
inline const arrival::qgrid::GridPtr& reference_grid() {
  static const auto grid = arrival::qgrid::make_grid(4096, 400.0, 1.0);
  return grid;
}

inline arrival::states::GaussianSpec reference_spec() { return {50.0, -5.0, 2.0}; }

inline const arrival::qgrid::WaveFunction& reference_packet() {
  static const auto psi = arrival::states::gaussian(reference_spec(), reference_grid());
  return psi;
}

}  // namespace fixture
