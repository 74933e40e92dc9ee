#include "arrival/backflow.hpp"

#include <cmath>
#include <numbers>

#include "arrival/error.hpp"
#include "arrival/histories.hpp"

namespace arrival::backflow {
namespace {

// int_{t1}^{t2} e^{i w t} dt, written so that w -> 0 does not cancel.
cplx time_integral(double w, double t1, double t2) {
  const double T = t2 - t1;
  const double x = 0.5 * w * T;
  const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return std::polar(T * sinc, 0.5 * w * (t1 + t2));
}

}  // namespace

double natural_momentum(double t1, double t2, double mass) { return std::sqrt(mass / (t2 - t1)); }

BackflowKernel build_kernel(int M, double p_max, double t1, double t2, double mass) {
  require(M >= 1, "build_kernel: need at least one node");
  require(p_max > 0.0, "build_kernel: p_max must be positive");
  const double w = p_max / M;
  std::vector<double> nodes(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) nodes[static_cast<std::size_t>(i)] = -(i + 0.5) * w;
  return build_kernel(std::move(nodes), std::vector<double>(static_cast<std::size_t>(M), w), t1,
                      t2, mass);
}

BackflowKernel build_kernel(std::vector<double> nodes, std::vector<double> weights, double t1,
                            double t2, double mass) {
  require(!nodes.empty() && nodes.size() == weights.size(),
          "build_kernel: nodes and weights must be non-empty and of equal length");
  require(std::isfinite(t1) && std::isfinite(t2) && t2 > t1, "build_kernel: degenerate interval");
  require(mass > 0.0, "build_kernel: mass must be positive");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    require(nodes[i] < 0.0, "build_kernel: nodes must be negative momenta");
    require(weights[i] > 0.0, "build_kernel: weights must be positive");
  }

  const auto M = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXcd K(M, M);
  const double pre = -1.0 / (4.0 * std::numbers::pi * mass);
  for (Eigen::Index i = 0; i < M; ++i) {
    const double pi = nodes[static_cast<std::size_t>(i)];
    const double wi = weights[static_cast<std::size_t>(i)];
    const double Ei = pi * pi / (2.0 * mass);
    for (Eigen::Index j = i; j < M; ++j) {
      const double pj = nodes[static_cast<std::size_t>(j)];
      const double wj = weights[static_cast<std::size_t>(j)];
      const double Ej = pj * pj / (2.0 * mass);
      const cplx kij = std::sqrt(wi * wj) * pre * (pi + pj) * time_integral(Ei - Ej, t1, t2);
      K(i, j) = kij;
      K(j, i) = std::conj(kij);
    }
    K(i, i) = K(i, i).real();
  }
  return BackflowKernel{std::move(nodes), std::move(weights), t1, t2, mass, std::move(K)};
}

Eigenpair min_eigenvalue(const BackflowKernel& kernel) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(kernel.K);
  if (solver.info() != Eigen::Success) throw NumericalError("backflow: eigensolver did not converge");
  Eigen::VectorXcd v = solver.eigenvectors().col(0);
  // Fix the global phase: largest component real and positive.
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::polar(1.0, -std::arg(v(imax)));
  return {solver.eigenvalues()(0), v};
}

Eigen::VectorXd eigenvalues(const BackflowKernel& kernel) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(kernel.K, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("backflow: eigensolver did not converge");
  return solver.eigenvalues();
}

double quadratic_form(const BackflowKernel& kernel, const Eigen::VectorXcd& v) {
  require(v.size() == kernel.size(), "quadratic_form: dimension mismatch");
  return (v.adjoint() * kernel.K * v)(0, 0).real();
}

WaveFunction backflow_state(const BackflowKernel& kernel, const Eigen::VectorXcd& eigvec,
                            const GridPtr& grid) {
  require(eigvec.size() == kernel.size(), "backflow_state: eigenvector dimension mismatch");
  const std::size_t M = kernel.p_nodes.size();
  std::vector<double> lo(M), hi(M);
  for (std::size_t i = 0; i < M; ++i) {
    lo[i] = kernel.p_nodes[i] - 0.5 * kernel.weights[i];
    hi[i] = kernel.p_nodes[i] + 0.5 * kernel.weights[i];
    require(lo[i] > -grid->p_max(), "backflow_state: kernel momenta exceed the grid Nyquist bound");
    require(hi[i] <= 1e-12, "backflow_state: quadrature cell extends into p > 0");
  }

  // psi_j ~ sum_k phi(k) e^{i k x_j}; with psi_j = (1/n) sum_k s_k e^{i k (x_j - x_0)}
  // the spectrum is s_k = phi(k) e^{i k x_0} up to normalization.
  const double x0 = grid->x(0);
  std::vector<cplx> spec(grid->size());
  std::vector<int> hits(M, 0);
  for (std::size_t j = 0; j < grid->size(); ++j) {
    const double k = grid->momentum(j);
    if (k >= 0.0) continue;
    for (std::size_t i = 0; i < M; ++i) {
      if (k >= lo[i] && k < hi[i]) {
        const cplx amp = eigvec(static_cast<Eigen::Index>(i)) / std::sqrt(kernel.weights[i]);
        spec[j] = amp * std::polar(1.0, k * x0);
        ++hits[i];
        break;
      }
    }
  }
  for (std::size_t i = 0; i < M; ++i)
    require(hits[i] > 0, "backflow_state: grid momentum spacing coarser than a quadrature cell");

  WaveFunction psi = qgrid::from_momentum(grid, std::move(spec));
  const double n = psi.norm();
  require(n > 0.0, "backflow_state: zero vector");
  psi *= 1.0 / n;
  return psi;
}

Witness interference_witness(const WaveFunction& psi0, double t1, double t2) {
  WaveFunction c_psi = histories::heisenberg_positive(psi0, t1);
  c_psi -= histories::heisenberg_positive(psi0, t2);
  const cplx expC = qgrid::inner(psi0, c_psi);
  const double expC2 = c_psi.norm2();
  return {expC.real(), expC.imag(), expC2, expC2 - expC.real()};
}

}  // namespace arrival::backflow
