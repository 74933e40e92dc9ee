#pragma once
// Initial states: Gaussian packets, superpositions, momentum diagnostics.

#include <utility>
#include <vector>

#include "arrival/qgrid.hpp"

namespace arrival::states {

using qgrid::cplx;
using qgrid::GridPtr;
using qgrid::WaveFunction;

// A packet for the arrival geometry: centred at q0 > 0, moving left (p0 < 0).
struct GaussianSpec {
  double q0;
  double p0;
  double sigma;

  // Throws PreconditionError unless q0 > 0, p0 < 0, sigma > 0 and
  // q0 >= 5 sigma (left tail below 1e-6 at t = 0).
  void validate() const;
};

// Normalized psi(x) ~ exp(-(x - q0)^2 / 4 sigma^2 + i p0 x) with no sign
// constraints on q0 or p0. Requires |p0| + 2/sigma < p_max.
WaveFunction wave_packet(double q0, double p0, double sigma, const GridPtr& grid);

// wave_packet() after GaussianSpec::validate().
WaveFunction gaussian(const GaussianSpec& spec, const GridPtr& grid);

// Normalized sum of c_i psi_i. Throws if the sum vanishes.
WaveFunction superpose(const std::vector<std::pair<cplx, WaveFunction>>& terms);

// Fraction of momentum-space probability carried by p < 0.
double negative_momentum_fraction(const WaveFunction& psi);

// Mean and standard deviation of the discrete momentum distribution.
struct MomentumMoments {
  double mean;
  double stddev;
};
MomentumMoments momentum_moments(const WaveFunction& psi);

}  // namespace arrival::states
