#pragma once
// Periodic 1D position/momentum lattice, exact free evolution, and the
// half-line projectors P = theta(x) and Pbar = theta(-x). Units hbar = 1.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "arrival/fft.hpp"

namespace arrival::qgrid {

using cplx = std::complex<double>;

// Grid points sit at x_j = -L + (j + 1/2) dx, so none falls on x = 0 and
// x_j > 0 exactly for j >= n/2. Momenta follow the FFT ordering.
class Grid {
 public:
  std::size_t size() const noexcept { return n_; }
  double half_width() const noexcept { return half_width_; }
  double dx() const noexcept { return dx_; }
  double dk() const noexcept { return dk_; }
  double mass() const noexcept { return mass_; }
  // Nyquist momentum pi * n / (2L).
  double p_max() const noexcept { return p_max_; }
  std::size_t first_positive() const noexcept { return n_ / 2; }

  double x(std::size_t j) const noexcept { return positions_[j]; }
  double momentum(std::size_t j) const noexcept { return momenta_[j]; }
  std::span<const double> positions() const noexcept { return positions_; }
  std::span<const double> momenta() const noexcept { return momenta_; }

  const FftPlan& fft() const noexcept { return *fft_; }

  // Conjugated weights w such that cdot(w, fft(psi)) = psi(0) and
  // cdot(w', fft(psi)) = psi'(0), by trigonometric interpolation.
  std::span<const cplx> origin_value_weights() const noexcept { return origin_value_; }
  std::span<const cplx> origin_slope_weights() const noexcept { return origin_slope_; }

  bool same_lattice(const Grid& other) const noexcept {
    return n_ == other.n_ && half_width_ == other.half_width_ && mass_ == other.mass_;
  }

 private:
  friend std::shared_ptr<const Grid> make_grid(std::size_t, double, double);
  Grid(std::size_t n, double half_width, double mass);

  std::size_t n_;
  double half_width_;
  double dx_;
  double dk_;
  double mass_;
  double p_max_;
  std::vector<double> positions_;
  std::vector<double> momenta_;
  std::vector<cplx> origin_value_;
  std::vector<cplx> origin_slope_;
  std::shared_ptr<const FftPlan> fft_;
};

using GridPtr = std::shared_ptr<const Grid>;

// n_points must be a power of two >= 256; half_width and mass positive.
GridPtr make_grid(std::size_t n_points, double half_width, double mass = 1.0);

// Smallest half-width that keeps a packet (q0, p0, sigma) at least ten widths
// from both box edges over [0, tau].
double required_half_width(double q0, double p0, double sigma, double tau, double mass = 1.0);

// Complex amplitudes in the position representation on a shared grid.
class WaveFunction {
 public:
  WaveFunction(GridPtr grid, std::vector<cplx> amplitudes, double time_label = 0.0);
  static WaveFunction zeros(GridPtr grid, double time_label = 0.0);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  std::span<cplx> amplitudes() noexcept { return amps_; }
  std::size_t size() const noexcept { return amps_.size(); }
  double time_label() const noexcept { return time_; }
  void set_time_label(double t) noexcept { time_ = t; }

  // dx * sum |psi_j|^2
  double norm2() const;
  double norm() const;

  WaveFunction& operator+=(const WaveFunction& other);
  WaveFunction& operator-=(const WaveFunction& other);
  WaveFunction& operator*=(cplx c);
  // this += c * other
  WaveFunction& add_scaled(cplx c, const WaveFunction& other);

 private:
  void check_same_grid(const WaveFunction& other) const;

  GridPtr grid_;
  std::vector<cplx> amps_;
  double time_;
};

WaveFunction operator+(WaveFunction a, const WaveFunction& b);
WaveFunction operator-(WaveFunction a, const WaveFunction& b);

// e^{-i p^2 t / 2m} on the momentum lattice.
std::vector<cplx> free_phase(const Grid& grid, double t);

// Unnormalized forward transform of the amplitudes (FFT ordering).
std::vector<cplx> to_momentum(const WaveFunction& psi);
// Inverse of to_momentum (includes the 1/n factor).
WaveFunction from_momentum(const GridPtr& grid, std::vector<cplx> spectrum, double time_label = 0.0);

// e^{-iHt} psi with H = p^2/2m, applied exactly in momentum space.
WaveFunction free_evolve(const WaveFunction& psi, double t);

// Multiply by the indicator of x > 0 (resp. x < 0). Not renormalized.
WaveFunction project_positive(const WaveFunction& psi);
WaveFunction project_negative(const WaveFunction& psi);

// ||P psi||^2
double positive_norm2(const WaveFunction& psi);

// <phi|psi> = dx * sum conj(phi_j) psi_j. Throws on mismatched grids.
cplx inner(const WaveFunction& phi, const WaveFunction& psi);

}  // namespace arrival::qgrid
