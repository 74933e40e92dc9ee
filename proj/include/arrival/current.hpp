#pragma once
// Probability current through x = 0 and the two routes to the crossing
// probability over [t1, t2]: the time-integrated current, and the
// half-line probability drop ||P psi(t1)||^2 - ||P psi(t2)||^2.

#include <vector>

#include "arrival/qgrid.hpp"

namespace arrival::current {

using qgrid::WaveFunction;

struct CurrentTrace {
  std::vector<double> times;
  std::vector<double> J;
  double dt = 0.0;
};

// J = -(1/m) Im[psi*(0) psi'(0)], positive for flow from x > 0 to x < 0.
// psi(0) and psi'(0) come from trigonometric interpolation of the spectrum.
double current_at_origin(const WaveFunction& psi_t);

// J(t) for psi0 evolved over [t1, t2] on a uniform grid of an even number of
// steps no larger than dt.
CurrentTrace current_trace(const WaveFunction& psi0, double t1, double t2, double dt);

// Composite Simpson integral of J over [t1, t2].
double integrated_current(const WaveFunction& psi0, double t1, double t2, double dt);

double simpson(const CurrentTrace& trace);

double semiclassical_crossing_probability(const WaveFunction& psi0, double t1, double t2);

}  // namespace arrival::current
