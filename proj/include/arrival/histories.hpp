#pragma once
// Class-operator branches C_alpha|psi> for crossing the origin, the
// decoherence functional built from them, and the Zeno survival scan.
//
// All branch vectors are returned in the t = 0 (Heisenberg) picture, so
// D(alpha, beta) is a plain inner product and q(alpha) an overlap with the
// untouched initial state.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arrival/qgrid.hpp"

namespace arrival::histories {

using qgrid::cplx;
using qgrid::WaveFunction;

// Projection times t_k = start + k * epsilon, k = 1..n_steps. Crossing
// intervals are blocks of coarse_factor consecutive steps, of width
// delta() = coarse_factor * epsilon, starting at `start`.
struct HistoryPartition {
  double epsilon = 1.0;
  std::size_t n_steps = 0;
  std::size_t coarse_factor = 1;
  double start = 0.0;

  // Validating constructor; coarse_factor must divide n_steps.
  static HistoryPartition make(double epsilon, std::size_t n_steps, std::size_t coarse_factor = 1,
                               double start = 0.0);

  double tau() const noexcept { return static_cast<double>(n_steps) * epsilon; }
  double delta() const noexcept { return static_cast<double>(coarse_factor) * epsilon; }
  std::size_t n_intervals() const noexcept { return n_steps / coarse_factor; }
  double time(std::size_t k) const noexcept { return start + static_cast<double>(k) * epsilon; }
  double boundary(std::size_t alpha) const noexcept {
    return start + static_cast<double>(alpha * coarse_factor) * epsilon;
  }
  double end_time() const noexcept { return time(n_steps); }
};

enum class BranchMode { exact, semiclassical };

std::string to_string(BranchMode mode);

struct BranchSet {
  HistoryPartition partition;
  WaveFunction initial;
  std::vector<WaveFunction> crossing;  // one per coarse interval
  WaveFunction non_crossing;
  BranchMode mode;

  // || sum_alpha C_alpha psi + C_nc psi - psi ||
  double resolution_residual() const;
};

// P(t)|psi> = e^{iHt} P e^{-iHt} |psi>.
WaveFunction heisenberg_positive(const WaveFunction& psi, double t);

// C_nc|psi> = P(t_n)...P(t_1)|psi>. n_steps == 0 returns psi.
WaveFunction non_crossing_branch(const WaveFunction& psi, const HistoryPartition& part);

// C_k|psi> = Pbar(t_k) P(t_{k-1})...P(t_1)|psi>, k in [1, n_steps].
WaveFunction first_crossing_branch(const WaveFunction& psi, const HistoryPartition& part,
                                   std::size_t k);

// All C_k|psi>, k = 1..n_steps, from a single sweep.
std::vector<WaveFunction> first_crossing_branches(const WaveFunction& psi,
                                                  const HistoryPartition& part);

// Sums over consecutive blocks of m_cg branches.
std::vector<WaveFunction> coarse_grain(const std::vector<WaveFunction>& branches, std::size_t m_cg);

// Coarse-grained first-crossing branches plus C_nc, one sweep, no storage of
// the fine branches.
BranchSet exact_branches(const WaveFunction& psi, const HistoryPartition& part);

// C_alpha = P(t_alpha) - P(t_alpha+1) at the interval boundaries. The
// non-crossing slot holds the exact complement psi - sum_alpha C_alpha psi,
// i.e. (Pbar(start) + P(end)) psi, so the set still resolves the identity.
BranchSet semiclassical_branches(const WaveFunction& psi, const HistoryPartition& part);

BranchSet make_branches(const WaveFunction& psi, const HistoryPartition& part, BranchMode mode);

struct DecoherenceReport {
  bool includes_nc = true;
  std::vector<std::string> labels;
  Eigen::MatrixXcd D;  // D(a, b) = <C_b psi | C_a psi>
  Eigen::VectorXd p;
  Eigen::VectorXcd q;
  // |D(a,b)| / sqrt(p(a) p(b)); NaN where not applicable (p below pmin, or a == b).
  Eigen::MatrixXd normalized;
  double max_offdiag = 0.0;
  bool decoherent = true;
  double eps_dec = 0.1;
  // Always evaluated over the full set including C_nc.
  cplx q_sum;
  double identity_residual = 0.0;  // max_a |q(a) - p(a) - sum_{b != a} D(a, b)|
  double hermiticity_residual = 0.0;

  std::size_t peak() const;  // index of the largest p(alpha)
};

inline constexpr double kMinBranchProbability = 1e-14;

DecoherenceReport decoherence_analysis(const BranchSet& branches, bool include_nc = true,
                                       double eps_dec = 0.1);

struct ZenoPoint {
  double epsilon;
  double survival;  // ||C_nc psi||^2
};

// Survival for each epsilon; each must divide tau.
std::vector<ZenoPoint> zeno_reflection_scan(const WaveFunction& psi, double tau,
                                            const std::vector<double>& eps_list);

// n with n * epsilon == tau to relative 1e-9; throws otherwise.
std::size_t steps_for(double tau, double epsilon);

}  // namespace arrival::histories
