#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "gridmarket/compare.hpp"

using namespace gridmarket;

TEST_CASE("two-node limits are ordered inner, exact, relaxed") {
  auto f = fixtures::two_node(0.1, 0.1);
  auto d = DemandProfile::zeros(1);
  const double big = 20.0;
  const double cia = cia_limit(f, d, big, {1}).total;
  const double exact = exact_limit_grid(f, d, 1, 1e-4, 2.0);
  auto socp = socp_limit(f, d, big, {1});
  REQUIRE(socp.solved());
  CHECK(cia > 0.0);
  CHECK(cia <= exact + 1e-6);
  CHECK(exact < socp.total - 1e-6);
  // The relaxation claims feasibility while the exact voltage is out of range.
  CHECK(socp.exact.max_voltage() > f.v_max[0]);

  const double cia_low = cia_limit(f, d, big, {1}, InjectionSense::lower).total;
  const double exact_low = exact_limit_grid(f, d, 1, 1e-4, 2.0, InjectionSense::lower);
  CHECK(cia_low < 0.0);
  CHECK(cia_low >= exact_low - 1e-6);
}

TEST_CASE("exact grid limit agrees with the closed form") {
  // V(p) = v_max solved for p on the high root: p = (v - v0 + |z|^2 p^2 / v) / (2 r).
  const double r = 0.1, vmax = 1.1025;
  auto f = fixtures::two_node(r, r);
  const double z2 = 2 * r * r;
  // Fixed point of p = (vmax - 1 + z2 p^2 / vmax) / (2 r).
  double p = 0.5;
  for (int i = 0; i < 200; ++i) p = (vmax - 1.0 + z2 * p * p / vmax) / (2 * r);
  const double grid = exact_limit_grid(f, DemandProfile::zeros(1), 1, 1e-4, 2.0);
  CHECK(grid <= p);
  CHECK(grid > p - 1e-4);
}

TEST_CASE("LinDist misses the exact lower limit") {
  auto f = fixtures::two_node(0.1, 0.1);
  auto d = DemandProfile::zeros(1);
  auto lin = lindist_limit(f, d, 20.0, {1}, InjectionSense::lower);
  REQUIRE(lin.solved());
  CHECK(lin.claimed_min_v >= f.v_min[0] - 1e-9);
  CHECK(lin.exact.min_voltage() < f.v_min[0]);
}

TEST_CASE("zero cap: every method admits nothing") {
  auto loaded = load_feeder_file(fixtures::data_path("feeders/three_node.json"));
  auto rows = compare_methods(loaded.feeder, loaded.demand, {0.0}, {});
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CAPTURE(row.method);
    CHECK(std::abs(row.injection_mw) < 1e-6);
    CHECK(row.true_max_voltage == doctest::Approx(rows.front().true_max_voltage).epsilon(1e-6));
  }
}
