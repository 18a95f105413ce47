#include <cmath>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "gridmarket/distflow.hpp"

using namespace gridmarket;

namespace {

// High root of v1^2 - b v1 + c = 0, written out independently of the library.
double quadratic_root(double r, double x, double p, double q, double v0) {
  const double b = v0 + 2.0 * (r * p + x * q);
  const double c = (r * r + x * x) * (p * p + q * q);
  return 0.5 * (b + std::sqrt(b * b - 4.0 * c));
}

}  // namespace

TEST_CASE("two-node sweep matches the closed-form root") {
  CHECK(quadratic_root(0.1, 0.1, -0.5, 0.0, 1.0) == doctest::Approx(0.894410).epsilon(1e-6));
  CHECK(solve_two_node_exact(0.1, 0.1, -0.5, 0.0, 1.0) == doctest::Approx(0.8944097208657795).epsilon(1e-12));

  const double cases[][4] = {{0.1, 0.1, -0.5, 0.0}, {0.1, 0.1, 0.5, 0.0}, {0.05, 0.2, -0.3, -0.1},
                             {0.02, 0.04, 1.5, 0.2}, {0.1, 0.1, 0.0, 0.0}};
  for (const auto& c : cases) {
    auto f = fixtures::two_node(c[0], c[1], 0.5, 2.0);
    auto s = solve_distflow(f, {c[2]}, {c[3]});
    REQUIRE(s.converged);
    CHECK(std::abs(s.V[0] - quadratic_root(c[0], c[1], c[2], c[3], 1.0)) < 1e-8);
    CHECK(std::abs(s.l[0] - (c[2] * c[2] + c[3] * c[3]) / s.V[0]) < 1e-8);
    CHECK(s.residual < 1e-8);
  }
}

TEST_CASE("two-node closed form rejects a negative discriminant") {
  CHECK_THROWS_AS(solve_two_node_exact(0.1, 0.1, -5.0, 0.0, 1.0), std::domain_error);
}

TEST_CASE("residual is small on every converged random solve") {
  auto loaded = load_feeder_file(fixtures::data_path("feeders/ieee37.json"));
  const auto& f = loaded.feeder;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(f.node_count), q(f.node_count);
    for (std::size_t k = 0; k < f.node_count; ++k) {
      p[k] = u(rng) - loaded.demand.p_load[k];
      q[k] = -loaded.demand.q_load[k];
    }
    auto s = solve_distflow(f, p, q);
    if (!s.converged) continue;
    CHECK(s.residual < 1e-8);
    CHECK(distflow_residual(f, p, q, s) < 1e-8);
  }
}

TEST_CASE("voltage collapse is reported, not thrown") {
  auto f = fixtures::two_node(0.1, 0.1);
  PowerFlowSolution s;
  CHECK_NOTHROW(s = solve_distflow(f, {-5.0}, {0.0}));
  CHECK_FALSE(s.converged);
  CHECK_FALSE(s.diagnostic.empty());
  auto rep = check_admissible(f, {-5.0}, {0.0});
  CHECK_FALSE(rep.clean());
  CHECK_FALSE(rep.converged);
}

TEST_CASE("LinDist drops losses") {
  auto f = fixtures::path(2, 0.02, 0.04);
  auto s = solve_lindist(f, {0.1, -0.3}, {0.0, -0.1});
  // V1 = 1 + 2(0.02 * (-0.2) + 0.04 * (-0.1)), V2 = V1 + 2(0.02 * (-0.3) + 0.04 * (-0.1))
  CHECK(s.V[0] == doctest::Approx(1.0 - 0.016));
  CHECK(s.V[1] == doctest::Approx(1.0 - 0.016 - 0.02));
  CHECK(s.P[0] == doctest::Approx(-0.2));
  CHECK(s.l[0] == 0.0);
}

TEST_CASE("admissibility check lists voltage and current violations") {
  auto f = fixtures::two_node(0.1, 0.1);
  CHECK(check_admissible(f, {0.0}, {0.0}).clean());
  auto high = check_admissible(f, {0.6}, {0.0});
  REQUIRE(high.voltage.size() == 1);
  CHECK(high.voltage[0].kind == Violation::Kind::voltage_high);
  auto low = check_admissible(f, {-0.5}, {0.0});
  REQUIRE(low.voltage.size() == 1);
  CHECK(low.voltage[0].kind == Violation::Kind::voltage_low);

  FeederModel tight = fixtures::make_feeder({{0, 1}}, 0.01, 0.01, 0.81, 1.21, 0.04);
  auto cur = check_admissible(tight, {0.3}, {0.0});
  REQUIRE(cur.current.size() == 1);
  CHECK(cur.current[0].kind == Violation::Kind::current_high);
  CHECK(cur.worst_violation > 0.0);
}

TEST_CASE("box corners: order and cap") {
  auto c = box_corners({0.0, 0.0, 1.0}, {1.0, 2.0, 1.0});
  REQUIRE(c.size() == 4);
  CHECK(c[0] == std::vector<double>{1.0, 2.0, 1.0});
  CHECK(c[1] == std::vector<double>{0.0, 0.0, 1.0});
  std::vector<double> lo(10, 0.0), hi(10, 1.0);
  CHECK(box_corners(lo, hi, 64).size() == 64);
}

TEST_CASE("box audit is deterministic in the seed") {
  auto loaded = load_feeder_file(fixtures::data_path("feeders/three_node.json"));
  std::vector<double> lo{0.0, 0.0}, hi{0.5, 0.5};
  auto a = sample_box_admissibility(loaded.feeder, loaded.demand, lo, hi, 50, 3);
  auto b = sample_box_admissibility(loaded.feeder, loaded.demand, lo, hi, 50, 3);
  CHECK(a.samples == 50);
  CHECK(a.corners == 4);
  CHECK(a.worst_violation == b.worst_violation);
  CHECK(a.worst_dispatch == b.worst_dispatch);
}
