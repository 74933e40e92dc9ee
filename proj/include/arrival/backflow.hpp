#pragma once
// The crossing operator over [t1, t2] restricted to negative momenta, its
// negative eigenvalues, and the position-space states they describe.

#include <vector>

#include <Eigen/Dense>

#include "arrival/qgrid.hpp"

namespace arrival::backflow {

using qgrid::cplx;
using qgrid::GridPtr;
using qgrid::WaveFunction;

// K(i, j) = sqrt(w_i w_j) <p_i| C |p_j>, with
// <p|C|p'> = -(p + p') / (4 pi m) * int_{t1}^{t2} e^{i(E - E')t} dt.
struct BackflowKernel {
  std::vector<double> p_nodes;
  std::vector<double> weights;
  double t1 = 0.0;
  double t2 = 1.0;
  double mass = 1.0;
  Eigen::MatrixXcd K;

  Eigen::Index size() const noexcept { return K.rows(); }
};

// Momentum scale sqrt(m / (t2 - t1)) in which the kernel is dimensionless.
double natural_momentum(double t1, double t2, double mass = 1.0);

// M uniform midpoint nodes on (-p_max, 0).
BackflowKernel build_kernel(int M, double p_max, double t1, double t2, double mass = 1.0);

// Arbitrary nodes (all negative) with positive quadrature weights.
BackflowKernel build_kernel(std::vector<double> nodes, std::vector<double> weights, double t1,
                            double t2, double mass = 1.0);

struct Eigenpair {
  double lambda;
  Eigen::VectorXcd vector;  // unit norm
};

// Most negative eigenvalue and its eigenvector. Throws NumericalError if the
// eigensolver does not converge.
Eigenpair min_eigenvalue(const BackflowKernel& kernel);

Eigen::VectorXd eigenvalues(const BackflowKernel& kernel);

// v^dagger K v for unit v.
double quadratic_form(const BackflowKernel& kernel, const Eigen::VectorXcd& v);

// Position-space state whose momentum amplitude is v_i / sqrt(w_i) across the
// quadrature cell of node i (a cell-averaged plane wave per node), normalized
// on the grid. Every cell must lie inside (-p_max, 0] of the grid and hold at
// least one lattice momentum.
WaveFunction backflow_state(const BackflowKernel& kernel, const Eigen::VectorXcd& eigvec,
                            const GridPtr& grid);

struct Witness {
  double expC;       // <psi|C psi>
  double expC_imag;  // residual imaginary part of <psi|C psi>
  double expC2;      // ||C psi||^2
  double witness;    // expC2 - expC = -<psi|C(1 - C)|psi>
};

// C|psi> = P(t1)|psi> - P(t2)|psi> in the Heisenberg picture.
Witness interference_witness(const WaveFunction& psi0, double t1, double t2);

}  // namespace arrival::backflow
