#include <doctest.h>

#include <cmath>
#include <random>

#include "arrival/error.hpp"
#include "arrival/histories.hpp"
#include "arrival/states.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace arrival;
using histories::HistoryPartition;
using qgrid::cplx;
using qgrid::WaveFunction;

namespace {

double distance(const WaveFunction& a, const WaveFunction& b) { return (a - b).norm(); }

// Direct product of Heisenberg projections, used to cross-check the sweep.
WaveFunction naive_first_crossing(const WaveFunction& psi, const HistoryPartition& part,
                                  std::size_t k) {
  WaveFunction run = psi;
  for (std::size_t j = 1; j < k; ++j) run = histories::heisenberg_positive(run, part.time(j));
  return run - histories::heisenberg_positive(run, part.time(k));
}

}  // namespace

TEST_CASE("partition construction") {
  const auto p = HistoryPartition::make(0.5, 12, 3, 1.0);
  CHECK(p.tau() == 6.0);
  CHECK(p.delta() == 1.5);
  CHECK(p.n_intervals() == 4);
  CHECK(p.time(0) == 1.0);
  CHECK(p.end_time() == 7.0);
  CHECK(p.boundary(2) == 4.0);
  CHECK_THROWS_AS(HistoryPartition::make(0.5, 12, 5), PreconditionError);
  CHECK_THROWS_AS(HistoryPartition::make(-0.5, 12, 1), PreconditionError);
  CHECK_THROWS_AS(HistoryPartition::make(0.5, 12, 0), PreconditionError);
  CHECK_NOTHROW(HistoryPartition::make(0.5, 0, 1));
}

TEST_CASE("steps_for") {
  CHECK(histories::steps_for(20.0, 0.125) == 160);
  CHECK(histories::steps_for(1.2, 0.4) == 3);
  CHECK_THROWS_AS(histories::steps_for(20.0, 0.3), PreconditionError);
  CHECK_THROWS_AS(histories::steps_for(20.0, 0.0), PreconditionError);
}

TEST_CASE("heisenberg projection matches the definition") {
  const auto& psi = fixture::reference_packet();
  const double t = 9.3;
  const auto direct =
      qgrid::free_evolve(qgrid::project_positive(qgrid::free_evolve(psi, t)), -t);
  CHECK(distance(histories::heisenberg_positive(psi, t), direct) < 1e-13);
}

TEST_CASE("non-crossing branch") {
  const auto& psi = fixture::reference_packet();
  SUBCASE("zero steps is the identity") {
    const auto out = histories::non_crossing_branch(psi, HistoryPartition::make(1.0, 0));
    CHECK(distance(out, psi) == 0.0);
  }
  SUBCASE("short horizon leaves the packet in x > 0") {
    const auto out = histories::non_crossing_branch(psi, HistoryPartition::make(0.8, 5));
    CHECK(out.norm2() > 0.999);
  }
  SUBCASE("long horizon: the packet has gone") {
    const auto out = histories::non_crossing_branch(psi, HistoryPartition::make(0.8, 25));
    CHECK(out.norm2() < 0.01);
  }
}

TEST_CASE("first-crossing branches") {
  const auto& psi = fixture::reference_packet();
  const auto part = HistoryPartition::make(1.0, 20);

  CHECK(histories::first_crossing_branch(psi, part, 1).norm2() < 1e-20);
  CHECK_THROWS_AS(histories::first_crossing_branch(psi, part, 0), PreconditionError);
  CHECK_THROWS_AS(histories::first_crossing_branch(psi, part, 21), PreconditionError);

  const auto all = histories::first_crossing_branches(psi, part);
  REQUIRE(all.size() == 20);
  std::size_t peak = 0;
  for (std::size_t k = 0; k < all.size(); ++k)
    if (all[k].norm2() > all[peak].norm2()) peak = k;
  CHECK(peak + 1 == 10);

  for (std::size_t k : {1u, 7u, 10u, 13u}) {
    CAPTURE(k);
    CHECK(distance(all[k - 1], naive_first_crossing(psi, part, k)) < 1e-12);
    CHECK(distance(all[k - 1], histories::first_crossing_branch(psi, part, k)) < 1e-13);
  }

  auto total = histories::non_crossing_branch(psi, part);
  for (const auto& c : all) total += c;
  CHECK(distance(total, psi) < 1e-10);
}

TEST_CASE("resolution of identity on random states and partitions") {
  std::mt19937_64 rng(17);
  const auto g = qgrid::make_grid(1024, 120.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    WaveFunction psi(g, oracle::random_vector(g->size(), rng));
    // Band-limit the random vector so it is not pure grid noise.
    auto spec = qgrid::to_momentum(psi);
    for (std::size_t j = 0; j < spec.size(); ++j)
      if (std::abs(g->momentum(j)) > 4.0) spec[j] = 0.0;
    psi = qgrid::from_momentum(g, spec);
    psi *= 1.0 / psi.norm();
    const std::size_t m = 1 + trial % 3;
    const auto part = HistoryPartition::make(0.1 + u(rng), 6 * m, m, u(rng));
    for (auto mode : {histories::BranchMode::exact, histories::BranchMode::semiclassical}) {
      const auto set = histories::make_branches(psi, part, mode);
      CHECK(set.resolution_residual() < 1e-10);
    }
  }
}

TEST_CASE("coarse graining") {
  const auto& psi = fixture::reference_packet();
  const auto part = HistoryPartition::make(1.0, 12);
  const auto fine = histories::first_crossing_branches(psi, part);

  const auto same = histories::coarse_grain(fine, 1);
  REQUIRE(same.size() == fine.size());
  for (std::size_t k = 0; k < fine.size(); ++k) CHECK(distance(same[k], fine[k]) == 0.0);

  const auto one = histories::coarse_grain(fine, 12);
  REQUIRE(one.size() == 1);
  CHECK(distance(one[0], psi - histories::non_crossing_branch(psi, part)) < 1e-10);

  const auto blocks = histories::coarse_grain(fine, 3);
  REQUIRE(blocks.size() == 4);
  for (std::size_t a = 0; a < 4; ++a) {
    double bound = 0.0;
    for (std::size_t k = 3 * a; k < 3 * a + 3; ++k) bound += fine[k].norm();
    CHECK(blocks[a].norm() <= bound + 1e-14);
  }
  CHECK_THROWS_AS(histories::coarse_grain(fine, 5), PreconditionError);

  // The one-sweep coarse set agrees with summing the fine list.
  const auto set = histories::exact_branches(psi, HistoryPartition::make(1.0, 12, 3));
  for (std::size_t a = 0; a < 4; ++a) CHECK(distance(set.crossing[a], blocks[a]) < 1e-13);
}

TEST_CASE("semiclassical branches") {
  const auto& psi = fixture::reference_packet();
  SUBCASE("single interval covering the full crossing") {
    const auto set = histories::semiclassical_branches(psi, HistoryPartition::make(20.0, 1));
    REQUIRE(set.crossing.size() == 1);
    CHECK(distance(set.crossing[0], psi) < 1e-3);
  }
  SUBCASE("overlap equals the half-line probability drop") {
    const auto part = HistoryPartition::make(1.0, 6, 2, 7.0);
    const auto set = histories::semiclassical_branches(psi, part);
    for (std::size_t a = 0; a < part.n_intervals(); ++a) {
      const double drop = qgrid::positive_norm2(qgrid::free_evolve(psi, part.boundary(a))) -
                          qgrid::positive_norm2(qgrid::free_evolve(psi, part.boundary(a + 1)));
      const cplx q = qgrid::inner(psi, set.crossing[a]);
      CHECK(std::abs(q - drop) < 1e-13);
    }
  }
  SUBCASE("close to the exact branches at epsilon = 2 t_z") {
    const auto part = HistoryPartition::make(0.8, 25);
    const auto ex = histories::exact_branches(psi, part);
    const auto sc = histories::semiclassical_branches(psi, part);
    double worst = 0.0;
    for (std::size_t a = 0; a < part.n_intervals(); ++a)
      worst = std::max(worst, distance(ex.crossing[a], sc.crossing[a]));
    // Measured 0.063 on this grid and 0.059 at N = 32768: each projection
    // reflects a little, and that residue is not small enough to pass.
    MESSAGE("max branch distance " << worst);
    CHECK(worst < 0.05);
  }
}

TEST_CASE("decoherence functional properties") {
  const auto& psi = fixture::reference_packet();
  const auto part = HistoryPartition::make(1.0, 20, 2, 1.0);
  const auto set = histories::exact_branches(psi, part);
  const auto rep = histories::decoherence_analysis(set, true, 0.1);

  REQUIRE(rep.p.size() == 11);
  CHECK(rep.labels.back() == "nc");
  CHECK(rep.hermiticity_residual < 1e-12);
  CHECK(rep.identity_residual < 1e-10);
  CHECK(std::abs(rep.q_sum - 1.0) < 1e-10);
  for (Eigen::Index a = 0; a < rep.p.size(); ++a) {
    CHECK(rep.p(a) >= 0.0);
    CHECK(rep.D(a, a).real() == rep.p(a));
    CHECK(std::isnan(rep.normalized(a, a)));
  }
  CHECK(rep.peak() == 4);  // [9, 11]

  // Without the nc slot the matrix shrinks but the sum rule still closes.
  const auto rep2 = histories::decoherence_analysis(set, false, 0.1);
  CHECK(rep2.p.size() == 10);
  CHECK(!rep2.includes_nc);
  CHECK(std::abs(rep2.q_sum - 1.0) < 1e-10);
}

TEST_CASE("tiny branch probabilities are flagged not applicable") {
  const auto& psi = fixture::reference_packet();
  // Early intervals carry p well below 1e-14.
  const auto set = histories::exact_branches(psi, HistoryPartition::make(1.0, 4));
  const auto rep = histories::decoherence_analysis(set);
  CHECK(rep.p(0) < histories::kMinBranchProbability);
  for (Eigen::Index b = 0; b < rep.p.size(); ++b) CHECK(std::isnan(rep.normalized(0, b)));
  CHECK(std::isfinite(rep.max_offdiag));
}

TEST_CASE("coarse-grained functional equals block sums of the fine one") {
  const auto& psi = fixture::reference_packet();
  const auto fine_set = histories::exact_branches(psi, HistoryPartition::make(1.0, 12, 1, 4.0));
  const auto coarse_set = histories::exact_branches(psi, HistoryPartition::make(1.0, 12, 3, 4.0));
  const auto F = histories::decoherence_analysis(fine_set, false).D;
  const auto Cg = histories::decoherence_analysis(coarse_set, false).D;
  double err = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      err = std::max(err, std::abs(Cg(a, b) - F.block(3 * a, 3 * b, 3, 3).sum()));
  CHECK(err < 1e-12);
}

TEST_CASE("zeno reflection scan") {
  const auto& psi = fixture::reference_packet();
  SUBCASE("single projection after the crossing") {
    const auto pts = histories::zeno_reflection_scan(psi, 20.0, {20.0});
    CHECK(pts[0].survival < 1e-6);
  }
  SUBCASE("monotone as epsilon shrinks") {
    const auto pts = histories::zeno_reflection_scan(psi, 20.0, {2.0, 1.0, 0.5, 0.25, 0.125});
    for (std::size_t i = 1; i < pts.size(); ++i)
      CHECK(pts[i].survival >= pts[i - 1].survival - 1e-3);
  }
  SUBCASE("a non-divisor fails before any work") {
    CHECK_THROWS_AS(histories::zeno_reflection_scan(psi, 20.0, {1.0, 0.3}), PreconditionError);
  }
}
