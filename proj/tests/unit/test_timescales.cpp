#include <doctest.h>

#include "arrival/error.hpp"
#include "arrival/timescales.hpp"
#include "support/fixtures.hpp"

using namespace arrival;
using histories::HistoryPartition;

TEST_CASE("packet timescales") {
  const auto spec = fixture::reference_spec();
  CHECK(timescales::arrival_time(spec) == 10.0);
  CHECK(timescales::zeno_time_packet(spec) == doctest::Approx(0.4));
  CHECK(timescales::zeno_time_packet({50, -5, 4}) ==
        doctest::Approx(2 * timescales::zeno_time_packet(spec)));
  CHECK(timescales::arrival_time(spec, 2.0) == 20.0);
}

TEST_CASE("inverse energy spread") {
  // For a Gaussian, Delta H = |p0| dp / m * sqrt(1 + dp^2 / (2 p0^2)) with dp = 1/(2 sigma).
  const auto& psi = fixture::reference_packet();
  const double dp = 0.25;
  const double expected = 1.0 / (5.0 * dp * std::sqrt(1.0 + dp * dp / 50.0));
  const double tz = timescales::zeno_time_general(psi);
  CHECK(tz == doctest::Approx(expected).epsilon(1e-8));
  // The packet form drops an O(1) factor: 1/Delta H is close to twice m sigma / |p0|.
  const double packet = timescales::zeno_time_packet(fixture::reference_spec());
  CHECK(std::abs(tz - 2 * packet) / tz < 0.15);
}

TEST_CASE("inverse energy spread is undefined for a single momentum") {
  const auto& g = fixture::reference_grid();
  std::vector<qgrid::cplx> spec(g->size());
  spec[7] = 1.0;
  const auto plane = qgrid::from_momentum(g, spec);
  CHECK_THROWS_AS(timescales::zeno_time_general(plane), PreconditionError);
}

TEST_CASE("regime check") {
  const auto spec = fixture::reference_spec();
  SUBCASE("Delta = 5 t_z, boundaries at 8 and 12") {
    const auto r = timescales::regime_check(spec, HistoryPartition::make(2.0, 6));
    REQUIRE(r.interval.has_value());
    CHECK(*r.interval == 5);  // [10, 12]: t_a sits on an edge
    CHECK(!r.margin_ok);
    const auto r2 = timescales::regime_check(spec, HistoryPartition::make(4.0, 3));
    CHECK(*r2.interval == 2);  // [8, 12]
    CHECK(r2.margin == doctest::Approx(5.0));
    CHECK(r2.regime_ok);
  }
  SUBCASE("Delta = 2 centred on t_a") {
    const auto r = timescales::regime_check(spec, HistoryPartition::make(1.0, 20, 2, 1.0));
    CHECK(r.delta == 2.0);
    CHECK(r.delta_ok);
    CHECK(r.margin == doctest::Approx(2.5));
    CHECK(r.peaking_ok);
    CHECK(r.regime_ok);
  }
  SUBCASE("Delta = t_z fails") {
    const auto r = timescales::regime_check(spec, HistoryPartition::make(0.4, 50));
    CHECK(!r.delta_ok);
    CHECK(!r.regime_ok);
  }
  SUBCASE("t_a outside every interval") {
    const auto r = timescales::regime_check(spec, HistoryPartition::make(1.0, 5));
    CHECK(!r.interval.has_value());
    CHECK(!r.regime_ok);
  }
  SUBCASE("weak momentum peaking") {
    const auto r = timescales::regime_check({50, -2, 2}, HistoryPartition::make(5.0, 10));
    CHECK(r.momentum_peaking == 4.0);
    CHECK(!r.peaking_ok);
  }
  SUBCASE("enlarging Delta never breaks a passing regime") {
    for (double d : {2.0, 4.0, 10.0, 20.0}) {
      const auto r = timescales::regime_check(spec, HistoryPartition::make(d, 1, 1, 10.0 - d / 2));
      CAPTURE(d);
      CHECK(r.regime_ok);
    }
  }
}
