#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "gridmarket/distflow.hpp"
#include "gridmarket/network_matrices.hpp"

using namespace gridmarket;

namespace {

// Brute-force subtree membership: C(b, c) = 1 iff walking up from c reaches b.
Eigen::MatrixXd reachability(const FeederModel& f) {
  const auto n = static_cast<Eigen::Index>(f.node_count);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int child = 1; child <= static_cast<int>(f.node_count); ++child)
    for (int u = child; u != 0; u = f.parent(u)) c(u - 1, child - 1) = 1.0;
  return c;
}

// 2 * sum of resistances on the shared part of the paths to the substation.
double shared_path_resistance(const FeederModel& f, int i, int j) {
  std::vector<bool> on_i(f.node_count + 1, false);
  for (int u = i; u != 0; u = f.parent(u)) on_i[static_cast<std::size_t>(u)] = true;
  double sum = 0.0;
  for (int u = j; u != 0; u = f.parent(u))
    if (on_i[static_cast<std::size_t>(u)]) sum += f.branch_into(u).r;
  return 2.0 * sum;
}

void check_identities(const FeederModel& f) {
  auto m = build_matrices(f);
  const auto n = static_cast<Eigen::Index>(f.node_count);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  CHECK((m.C * (eye - m.A) - eye).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((m.C - reachability(f)).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) CHECK(m.Mp(i - 1, j - 1) == doctest::Approx(shared_path_resistance(f, i, j)));
  CHECK((m.Mp - m.Mp.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

}  // namespace

TEST_CASE("matrix identities on path, star and branched feeders") {
  SUBCASE("path") { check_identities(fixtures::path(6)); }
  SUBCASE("star") { check_identities(fixtures::star(5)); }
  SUBCASE("37-node") { check_identities(load_feeder(fixtures::data_path("feeders/ieee37.json"))); }
  SUBCASE("8-node") { check_identities(load_feeder(fixtures::data_path("feeders/eight_node.json"))); }
}

TEST_CASE("two-node sensitivities are 2r and 2x") {
  auto f = fixtures::two_node(0.1, 0.3);
  auto m = build_matrices(f);
  CHECK(m.C(0, 0) == 1.0);
  CHECK(m.A(0, 0) == 0.0);
  CHECK(m.Mp(0, 0) == doctest::Approx(0.2));
  CHECK(m.Mq(0, 0) == doctest::Approx(0.6));
  CHECK(m.H(0, 0) == doctest::Approx(0.1 * 0.1 + 0.3 * 0.3));
}

TEST_CASE("three-node path matrices") {
  auto f = fixtures::path(2, 0.02, 0.04);
  auto m = build_matrices(f);
  Eigen::Matrix2d C;
  C << 1, 1, 0, 1;
  CHECK((m.C - C).cwiseAbs().maxCoeff() == 0.0);
  Eigen::Matrix2d Mp;
  Mp << 0.04, 0.04, 0.04, 0.08;
  CHECK((m.Mp - Mp).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sign split recombines") {
  Eigen::MatrixXd a(2, 3);
  a << 1, -2, 0, -0.5, 3, -4;
  auto [pos, neg] = sign_split(a);
  CHECK((pos + neg - a).cwiseAbs().maxCoeff() == 0.0);
  CHECK(pos.minCoeff() >= 0.0);
  CHECK(neg.maxCoeff() <= 0.0);
  auto m = build_matrices(load_feeder(fixtures::data_path("feeders/ieee37.json")));
  CHECK((m.H_plus + m.H_minus - m.H).cwiseAbs().maxCoeff() == 0.0);
  CHECK((m.DX_plus + m.DX_minus - m.DX).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix form reproduces the exact power flow") {
  auto loaded = load_feeder_file(fixtures::data_path("feeders/ieee37.json"));
  const auto& f = loaded.feeder;
  auto m = build_matrices(f);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.05, 0.1);
  const auto n = f.node_count;
  std::vector<double> p(n), q(n);
  for (std::size_t k = 0; k < n; ++k) {
    p[k] = u(rng) - loaded.demand.p_load[k];
    q[k] = 0.5 * u(rng) - loaded.demand.q_load[k];
  }
  auto s = solve_distflow(f, p, q);
  REQUIRE(s.converged);
  Eigen::Map<const Eigen::VectorXd> pv(p.data(), static_cast<Eigen::Index>(n)), qv(q.data(), static_cast<Eigen::Index>(n)),
      lv(s.l.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd V = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), f.v0) + m.Mp * pv + m.Mq * qv - m.H * lv;
  Eigen::VectorXd P = m.C * pv - m.DR * lv;
  Eigen::VectorXd Q = m.C * qv - m.DX * lv;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    CHECK(V(i) == doctest::Approx(s.V[k]).epsilon(1e-9));
    CHECK(P(i) == doctest::Approx(s.P[k]).epsilon(1e-9));
    CHECK(Q(i) == doctest::Approx(s.Q[k]).epsilon(1e-9));
  }
}
