#include "arrival/histories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "arrival/error.hpp"
#include "arrival/simd/kernels.hpp"

namespace arrival::histories {
namespace {

using qgrid::GridPtr;

// Walks the projection lattice in momentum space. After step() the state is
// at t_k; crossed() holds the spectrum of Pbar(t_k) applied to the running
// product, and the running product itself has been projected onto x > 0.
class CrossingSweep {
 public:
  CrossingSweep(const WaveFunction& psi, const HistoryPartition& part)
      : grid_(psi.grid_ptr()),
        part_(part),
        step_phase_(qgrid::free_phase(*grid_, part.epsilon)),
        spec_(qgrid::to_momentum(psi)),
        crossed_(grid_->size()),
        work_(grid_->size()) {
    if (part.start != 0.0) simd::cmul(spec_, qgrid::free_phase(*grid_, part.start));
  }

  std::size_t k() const noexcept { return k_; }
  double time() const noexcept { return part_.time(k_); }
  std::span<const cplx> crossed() const noexcept { return crossed_; }

  void step() {
    simd::cmul(spec_, step_phase_);
    std::copy(spec_.begin(), spec_.end(), work_.begin());
    grid_->fft().backward(work_);
    simd::scale(work_, 1.0 / static_cast<double>(work_.size()));
    std::fill(work_.begin(), work_.begin() + static_cast<std::ptrdiff_t>(grid_->first_positive()),
              cplx{});
    grid_->fft().forward(work_);
    for (std::size_t j = 0; j < spec_.size(); ++j) crossed_[j] = spec_[j] - work_[j];
    spec_.swap(work_);
    ++k_;
  }

  // Accumulate e^{iHt_k} crossed into acc (momentum space).
  void accumulate_crossed(std::vector<cplx>& acc) const {
    simd::cmul_acc(acc, crossed_, qgrid::free_phase(*grid_, -time()));
  }

  WaveFunction crossed_heisenberg() const {
    std::vector<cplx> s(crossed_);
    simd::cmul(s, qgrid::free_phase(*grid_, -time()));
    return qgrid::from_momentum(grid_, std::move(s));
  }

  WaveFunction survivor_heisenberg() const {
    std::vector<cplx> s(spec_);
    simd::cmul(s, qgrid::free_phase(*grid_, -time()));
    return qgrid::from_momentum(grid_, std::move(s));
  }

 private:
  GridPtr grid_;
  HistoryPartition part_;
  std::vector<cplx> step_phase_;
  std::vector<cplx> spec_;
  std::vector<cplx> crossed_;
  std::vector<cplx> work_;
  std::size_t k_ = 0;
};

}  // namespace

HistoryPartition HistoryPartition::make(double epsilon, std::size_t n_steps,
                                        std::size_t coarse_factor, double start) {
  require(std::isfinite(epsilon) && epsilon > 0.0, "partition: epsilon must be positive");
  require(coarse_factor > 0, "partition: coarse factor must be positive");
  require(n_steps % coarse_factor == 0, "partition: coarse factor must divide n_steps");
  require(std::isfinite(start) && start >= 0.0, "partition: start must be non-negative");
  return HistoryPartition{epsilon, n_steps, coarse_factor, start};
}

std::string to_string(BranchMode mode) {
  return mode == BranchMode::exact ? "exact" : "semiclassical";
}

double BranchSet::resolution_residual() const {
  WaveFunction sum = non_crossing;
  for (const auto& c : crossing) sum += c;
  sum -= initial;
  return sum.norm();
}

WaveFunction heisenberg_positive(const WaveFunction& psi, double t) {
  return qgrid::free_evolve(qgrid::project_positive(qgrid::free_evolve(psi, t)), -t);
}

WaveFunction non_crossing_branch(const WaveFunction& psi, const HistoryPartition& part) {
  if (part.n_steps == 0 && part.start == 0.0) return psi;
  CrossingSweep sweep(psi, part);
  while (sweep.k() < part.n_steps) sweep.step();
  return sweep.survivor_heisenberg();
}

WaveFunction first_crossing_branch(const WaveFunction& psi, const HistoryPartition& part,
                                   std::size_t k) {
  require(k >= 1 && k <= part.n_steps, "first_crossing_branch: k out of range [1, n]");
  CrossingSweep sweep(psi, part);
  while (sweep.k() < k) sweep.step();
  return sweep.crossed_heisenberg();
}

std::vector<WaveFunction> first_crossing_branches(const WaveFunction& psi,
                                                  const HistoryPartition& part) {
  std::vector<WaveFunction> out;
  out.reserve(part.n_steps);
  CrossingSweep sweep(psi, part);
  while (sweep.k() < part.n_steps) {
    sweep.step();
    out.push_back(sweep.crossed_heisenberg());
  }
  return out;
}

std::vector<WaveFunction> coarse_grain(const std::vector<WaveFunction>& branches, std::size_t m_cg) {
  require(m_cg > 0 && branches.size() % m_cg == 0,
          "coarse_grain: m_cg must divide the number of branches");
  std::vector<WaveFunction> out;
  out.reserve(branches.size() / m_cg);
  for (std::size_t b = 0; b < branches.size(); b += m_cg) {
    WaveFunction acc = branches[b];
    for (std::size_t i = 1; i < m_cg; ++i) acc += branches[b + i];
    out.push_back(std::move(acc));
  }
  return out;
}

BranchSet exact_branches(const WaveFunction& psi, const HistoryPartition& part) {
  const auto& grid = psi.grid_ptr();
  CrossingSweep sweep(psi, part);
  std::vector<WaveFunction> coarse;
  coarse.reserve(part.n_intervals());
  std::vector<cplx> acc(grid->size());
  while (sweep.k() < part.n_steps) {
    sweep.step();
    sweep.accumulate_crossed(acc);
    if (sweep.k() % part.coarse_factor == 0) {
      coarse.push_back(qgrid::from_momentum(grid, acc));
      std::fill(acc.begin(), acc.end(), cplx{});
    }
  }
  WaveFunction nc = (part.n_steps == 0 && part.start == 0.0) ? psi : sweep.survivor_heisenberg();
  return BranchSet{part, psi, std::move(coarse), std::move(nc), BranchMode::exact};
}

BranchSet semiclassical_branches(const WaveFunction& psi, const HistoryPartition& part) {
  const std::size_t n = part.n_intervals();
  std::vector<WaveFunction> proj;
  proj.reserve(n + 1);
  for (std::size_t a = 0; a <= n; ++a) proj.push_back(heisenberg_positive(psi, part.boundary(a)));
  std::vector<WaveFunction> crossing;
  crossing.reserve(n);
  WaveFunction rest = psi;
  for (std::size_t a = 0; a < n; ++a) {
    crossing.push_back(proj[a] - proj[a + 1]);
    rest -= crossing.back();
  }
  return BranchSet{part, psi, std::move(crossing), std::move(rest), BranchMode::semiclassical};
}

BranchSet make_branches(const WaveFunction& psi, const HistoryPartition& part, BranchMode mode) {
  return mode == BranchMode::exact ? exact_branches(psi, part) : semiclassical_branches(psi, part);
}

std::size_t DecoherenceReport::peak() const {
  Eigen::Index idx = 0;
  if (p.size() > 0) p.maxCoeff(&idx);
  return static_cast<std::size_t>(idx);
}

DecoherenceReport decoherence_analysis(const BranchSet& branches, bool include_nc, double eps_dec) {
  require(eps_dec > 0.0, "decoherence_analysis: eps_dec must be positive");
  std::vector<const WaveFunction*> all;
  std::vector<std::string> labels;
  const auto& part = branches.partition;
  for (std::size_t a = 0; a < branches.crossing.size(); ++a) {
    all.push_back(&branches.crossing[a]);
    labels.push_back(fmt::format("[{:.6g},{:.6g}]", part.boundary(a), part.boundary(a + 1)));
  }
  all.push_back(&branches.non_crossing);
  labels.emplace_back("nc");
  const auto full = static_cast<Eigen::Index>(all.size());

  Eigen::MatrixXcd D(full, full);
  Eigen::VectorXcd q(full);
  for (Eigen::Index a = 0; a < full; ++a) {
    require(all[a]->grid().same_lattice(branches.initial.grid()),
            "decoherence_analysis: branches on different grids");
    q(a) = qgrid::inner(branches.initial, *all[a]);
    for (Eigen::Index b = 0; b <= a; ++b) {
      D(a, b) = qgrid::inner(*all[b], *all[a]);
      D(b, a) = std::conj(D(a, b));
    }
    D(a, a) = D(a, a).real();
  }

  DecoherenceReport rep;
  rep.includes_nc = include_nc;
  rep.eps_dec = eps_dec;
  rep.q_sum = q.sum();
  for (Eigen::Index a = 0; a < full; ++a) {
    cplx rhs = 0.0;
    for (Eigen::Index b = 0; b < full; ++b) rhs += D(a, b);
    // q(a) = p(a) + sum_{b != a} D(a, b) is the same as q(a) = sum_b D(a, b).
    rep.identity_residual = std::max(rep.identity_residual, std::abs(q(a) - rhs));
  }
  rep.hermiticity_residual = (D - D.adjoint()).cwiseAbs().maxCoeff();

  const Eigen::Index m = include_nc ? full : full - 1;
  rep.labels.assign(labels.begin(), labels.begin() + m);
  rep.D = D.topLeftCorner(m, m);
  rep.q = q.head(m);
  rep.p = rep.D.diagonal().real();
  rep.normalized = Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      if (a == b || rep.p(a) < kMinBranchProbability || rep.p(b) < kMinBranchProbability) continue;
      const double r = std::abs(rep.D(a, b)) / std::sqrt(rep.p(a) * rep.p(b));
      rep.normalized(a, b) = r;
      rep.max_offdiag = std::max(rep.max_offdiag, r);
    }
  }
  rep.decoherent = rep.max_offdiag < eps_dec;
  return rep;
}

std::size_t steps_for(double tau, double epsilon) {
  require(epsilon > 0.0 && tau > 0.0, "steps_for: tau and epsilon must be positive");
  const double ratio = tau / epsilon;
  const double n = std::round(ratio);
  require(n >= 1.0 && std::abs(n * epsilon - tau) <= 1e-9 * tau,
          fmt::format("epsilon {} does not divide tau {}", epsilon, tau));
  return static_cast<std::size_t>(n);
}

std::vector<ZenoPoint> zeno_reflection_scan(const WaveFunction& psi, double tau,
                                            const std::vector<double>& eps_list) {
  std::vector<std::size_t> steps;
  steps.reserve(eps_list.size());
  for (double eps : eps_list) steps.push_back(steps_for(tau, eps));
  std::vector<ZenoPoint> out;
  out.reserve(eps_list.size());
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const auto part = HistoryPartition::make(eps_list[i], steps[i]);
    out.push_back({eps_list[i], non_crossing_branch(psi, part).norm2()});
  }
  return out;
}

}  // namespace arrival::histories
