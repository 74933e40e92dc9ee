#include "arrival/qgrid.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "arrival/error.hpp"
#include "arrival/simd/kernels.hpp"

namespace arrival::qgrid {

Grid::Grid(std::size_t n, double half_width, double mass)
    : n_(n),
      half_width_(half_width),
      dx_(2.0 * half_width / static_cast<double>(n)),
      dk_(std::numbers::pi / half_width),
      mass_(mass),
      p_max_(std::numbers::pi * static_cast<double>(n) / (2.0 * half_width)),
      positions_(n),
      momenta_(n),
      origin_value_(n),
      origin_slope_(n),
      fft_(std::make_shared<FftPlan>(n)) {
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  for (std::size_t j = 0; j < n; ++j) {
    positions_[j] = -half_width + (static_cast<double>(j) + 0.5) * dx_;
    const auto s = static_cast<std::ptrdiff_t>(j);
    momenta_[j] = dk_ * static_cast<double>(s < half ? s : s - static_cast<std::ptrdiff_t>(n));
  }
  const double x0 = positions_[0];
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = momenta_[j];
    cplx u = std::polar(inv_n, -k * x0);
    cplx du = cplx{0.0, k} * u;
    if (j == n / 2) {  // Nyquist: symmetric interpolant
      u = std::cos(k * x0) * inv_n;
      du = 0.0;
    }
    origin_value_[j] = std::conj(u);
    origin_slope_[j] = std::conj(du);
  }
}

GridPtr make_grid(std::size_t n_points, double half_width, double mass) {
  require(n_points >= 256 && std::has_single_bit(n_points),
          "make_grid: n_points must be a power of two >= 256");
  require(std::isfinite(half_width) && half_width > 0.0, "make_grid: half_width must be positive");
  require(std::isfinite(mass) && mass > 0.0, "make_grid: mass must be positive");
  return GridPtr(new Grid(n_points, half_width, mass));
}

double required_half_width(double q0, double p0, double sigma, double tau, double mass) {
  const double spread = std::sqrt(1.0 + tau * tau / (4.0 * mass * mass * std::pow(sigma, 4)));
  return std::abs(q0) + 10.0 * sigma + std::abs(p0) * std::abs(tau) / mass + 10.0 * sigma * spread;
}

// --- WaveFunction -----------------------------------------------------------

WaveFunction::WaveFunction(GridPtr grid, std::vector<cplx> amplitudes, double time_label)
    : grid_(std::move(grid)), amps_(std::move(amplitudes)), time_(time_label) {
  require(grid_ != nullptr, "WaveFunction: null grid");
  require(amps_.size() == grid_->size(), "WaveFunction: amplitude count does not match grid");
}

WaveFunction WaveFunction::zeros(GridPtr grid, double time_label) {
  const std::size_t n = grid->size();
  return WaveFunction(std::move(grid), std::vector<cplx>(n), time_label);
}

double WaveFunction::norm2() const { return grid_->dx() * simd::norm2(amps_); }

double WaveFunction::norm() const { return std::sqrt(norm2()); }

void WaveFunction::check_same_grid(const WaveFunction& other) const {
  require(grid_->same_lattice(other.grid()), "wave functions live on different grids");
}

WaveFunction& WaveFunction::operator+=(const WaveFunction& other) { return add_scaled(1.0, other); }

WaveFunction& WaveFunction::operator-=(const WaveFunction& other) { return add_scaled(-1.0, other); }

WaveFunction& WaveFunction::operator*=(cplx c) {
  if (c.imag() == 0.0) {
    simd::scale(amps_, c.real());
  } else {
    std::vector<cplx> tmp(amps_.size());
    simd::caxpy(tmp, c, amps_);
    amps_ = std::move(tmp);
  }
  return *this;
}

WaveFunction& WaveFunction::add_scaled(cplx c, const WaveFunction& other) {
  check_same_grid(other);
  simd::caxpy(amps_, c, other.amps_);
  return *this;
}

WaveFunction operator+(WaveFunction a, const WaveFunction& b) { return a += b; }
WaveFunction operator-(WaveFunction a, const WaveFunction& b) { return a -= b; }

// --- transforms -------------------------------------------------------------

std::vector<cplx> free_phase(const Grid& grid, double t) {
  std::vector<cplx> phase(grid.size());
  const double c = -t / (2.0 * grid.mass());
  for (std::size_t j = 0; j < phase.size(); ++j) {
    const double k = grid.momentum(j);
    phase[j] = std::polar(1.0, c * k * k);
  }
  return phase;
}

std::vector<cplx> to_momentum(const WaveFunction& psi) {
  std::vector<cplx> spec(psi.amplitudes().begin(), psi.amplitudes().end());
  psi.grid().fft().forward(spec);
  return spec;
}

WaveFunction from_momentum(const GridPtr& grid, std::vector<cplx> spectrum, double time_label) {
  require(spectrum.size() == grid->size(), "from_momentum: length mismatch");
  grid->fft().backward(spectrum);
  simd::scale(spectrum, 1.0 / static_cast<double>(grid->size()));
  return WaveFunction(grid, std::move(spectrum), time_label);
}

WaveFunction free_evolve(const WaveFunction& psi, double t) {
  require(std::isfinite(t), "free_evolve: t must be finite");
  if (t == 0.0) return psi;
  std::vector<cplx> spec = to_momentum(psi);
  simd::cmul(spec, free_phase(psi.grid(), t));
  return from_momentum(psi.grid_ptr(), std::move(spec), psi.time_label() + t);
}

WaveFunction project_positive(const WaveFunction& psi) {
  WaveFunction out = psi;
  auto a = out.amplitudes();
  std::fill(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(psi.grid().first_positive()), cplx{});
  return out;
}

WaveFunction project_negative(const WaveFunction& psi) {
  WaveFunction out = psi;
  auto a = out.amplitudes();
  std::fill(a.begin() + static_cast<std::ptrdiff_t>(psi.grid().first_positive()), a.end(), cplx{});
  return out;
}

double positive_norm2(const WaveFunction& psi) {
  return psi.grid().dx() * simd::norm2(psi.amplitudes().subspan(psi.grid().first_positive()));
}

cplx inner(const WaveFunction& phi, const WaveFunction& psi) {
  require(phi.grid().same_lattice(psi.grid()), "inner: wave functions live on different grids");
  return phi.grid().dx() * simd::cdot(phi.amplitudes(), psi.amplitudes());
}

}  // namespace arrival::qgrid
