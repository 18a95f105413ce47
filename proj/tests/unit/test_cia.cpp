#include <cmath>
#include <fstream>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "gridmarket/cia.hpp"

using namespace gridmarket;

namespace {

double current_of(const Eigen::Vector3d& x) { return (x(0) * x(0) + x(1) * x(1)) / x(2); }

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("Taylor data at hand-derived points") {
  SUBCASE("origin") {
    BranchTaylor t = make_branch_taylor({0.0, 0.0, 1.05});
    CHECK(t.l0 == 0.0);
    CHECK(t.J.norm() == 0.0);
    Eigen::Matrix3d expected = Eigen::Vector3d(2.0 / 1.05, 2.0 / 1.05, 0.0).asDiagonal();
    CHECK((t.He - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("(1, 0, 1)") {
    BranchTaylor t = make_branch_taylor({1.0, 0.0, 1.0});
    CHECK(t.l0 == 1.0);
    CHECK((t.J - Eigen::Vector3d(2, 0, -1)).norm() < 1e-15);
    Eigen::Matrix3d h;
    h << 2, 0, -2, 0, 2, 0, -2, 0, 2;
    CHECK((t.He - h).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(t.eigenvalues(0) == doctest::Approx(0.0));
    CHECK(t.eigenvalues(1) == doctest::Approx(2.0));
    CHECK(t.eigenvalues(2) == doctest::Approx(4.0));
    CHECK((t.factor.transpose() * t.factor - t.He).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((t.J_plus - Eigen::Vector3d(2, 0, 0)).norm() == 0.0);
    CHECK((t.J_minus - Eigen::Vector3d(0, 0, -1)).norm() == 0.0);
  }
  SUBCASE("(3, 4, 25)") { CHECK(make_branch_taylor({3.0, 4.0, 25.0}).l0 == 1.0); }
}

TEST_CASE("second-order estimate") {
  BranchPoint x0{1.0, 0.0, 1.0};
  CHECK(taylor_current(x0, Eigen::Vector3d::Zero()) == 1.0);
  CHECK(taylor_current(x0, {0.1, 0.0, 0.0}) == doctest::Approx(1.21).epsilon(1e-14));
  CHECK(taylor_current(x0, {0.0, 0.0, 0.1}) == doctest::Approx(0.91).epsilon(1e-14));
  CHECK(std::abs(taylor_current(x0, {0.0, 0.0, 0.1}) - 1.0 / 1.1) == doctest::Approx(9.09e-4).epsilon(1e-2));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    BranchPoint x{2 * u(rng), 2 * u(rng), 1.0 + 0.2 * u(rng)};
    Eigen::Vector3d d(u(rng), u(rng), 0.0);
    Eigen::Vector3d at(x.P0 + d(0), x.Q0 + d(1), x.v0);
    CHECK(taylor_current(x, d) == doctest::Approx(current_of(at)).epsilon(1e-12));
  }
}

TEST_CASE("Jacobian and Hessian match central differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pq(-2.0, 2.0), vv(0.8, 1.2);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    BranchPoint x{pq(rng), pq(rng), vv(rng)};
    Eigen::Vector3d x0(x.P0, x.Q0, x.v0);
    Eigen::Vector3d J = x.jacobian();
    Eigen::Matrix3d H = x.hessian();
    for (int a = 0; a < 3; ++a) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e(a) = h;
      const double fd = (current_of(x0 + e) - current_of(x0 - e)) / (2 * h);
      CHECK(close_rel(J(a), fd, 1e-6));
      BranchPoint up{x.P0 + e(0), x.Q0 + e(1), x.v0 + e(2)};
      BranchPoint dn{x.P0 - e(0), x.Q0 - e(1), x.v0 - e(2)};
      Eigen::Vector3d col = (up.jacobian() - dn.jacobian()) / (2 * h);
      for (int b = 0; b < 3; ++b) CHECK(close_rel(H(b, a), col(b), 1e-6));
    }
    CHECK(close_rel(x.current(), current_of(x0), 1e-15));
  }
}

TEST_CASE("Hessian is positive semidefinite") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pq(-2.0, 2.0), vv(0.8, 1.2);
  double worst = 1.0;
  for (int i = 0; i < 1000; ++i) {
    BranchTaylor t = make_branch_taylor({pq(rng), pq(rng), vv(rng)});
    worst = std::min(worst, t.eigenvalues(0));
    CHECK(t.J(2) <= 0.0);
    CHECK((t.J_plus + t.J_minus - t.J).norm() == 0.0);
  }
  CHECK(worst >= -1e-10);
}

TEST_CASE("corner enumeration") {
  Eigen::Vector3d a(1, 1, 1);
  auto same = corner_deltas(a, a);
  for (const auto& c : same) CHECK(c == a);

  auto signs = corner_deltas(a, -a);
  for (int k = 0; k < 8; ++k) {
    for (int c = 0; c < 3; ++c) CHECK(signs[static_cast<std::size_t>(k)](c) == (((k >> c) & 1) ? -1.0 : 1.0));
  }

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Eigen::Matrix3d He = make_branch_taylor({1.0, 0.0, 1.0}).He;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector3d dp(u(rng), u(rng), u(rng)), dm(u(rng), u(rng), u(rng));
    double brute = -1e300;
    for (int s0 = 0; s0 < 2; ++s0)
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2) {
          Eigen::Vector3d c(s0 ? dm(0) : dp(0), s1 ? dm(1) : dp(1), s2 ? dm(2) : dp(2));
          brute = std::max(brute, c.dot(He * c));
        }
    CHECK(corner_psi(He, dp, dm) == doctest::Approx(brute).epsilon(1e-14));
  }
}

TEST_CASE("bound chain behind the upper current bound") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pq(-2.0, 2.0), vv(0.8, 1.2), d(-0.2, 0.2);
  for (int i = 0; i < 500; ++i) {
    BranchTaylor t = make_branch_taylor({pq(rng), pq(rng), vv(rng)});
    Eigen::Vector3d delta(d(rng), d(rng), d(rng));
    const double lin = t.J.dot(delta);
    const double quad = delta.dot(t.He * delta);
    const double top = t.l0 + std::max(2 * std::abs(lin), quad);
    const double mid = t.l0 + std::abs(lin) + 0.5 * quad;
    CHECK(top >= mid - 1e-14);
    CHECK(mid >= taylor_current(t.point, delta) - 1e-14);
  }
}

TEST_CASE("operating point is the zero-flexibility power flow") {
  auto zero = compute_operating_point(fixtures::path(3), DemandProfile::zeros(3));
  for (const auto& b : zero.branches) {
    CHECK(b.l0 == 0.0);
    CHECK(b.J.norm() == 0.0);
  }
  auto loaded = load_feeder_file(fixtures::data_path("feeders/three_node.json"));
  auto op = compute_operating_point(loaded.feeder, loaded.demand);
  REQUIRE(op.flow.converged);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(op.branches[k].point.P0 == op.flow.P[k]);
    CHECK(op.branches[k].point.v0 == op.flow.V[k]);
    CHECK(op.branches[k].l0 == doctest::Approx(op.flow.l[k]).epsilon(1e-12));
  }
  CHECK(op.flow.P[0] < 0.0);
}

TEST_CASE("constraint counts on the 37-node feeder") {
  auto loaded = load_feeder_file(fixtures::data_path("feeders/ieee37.json"));
  const auto n = loaded.feeder.node_count;
  auto mats = build_matrices(loaded.feeder);
  auto op = compute_operating_point(loaded.feeder, loaded.demand);
  opt::ConvexProgram prog;
  auto vars = add_cia_variables(prog, n);
  CiaInjections inj;
  for (std::size_t k = 0; k < n; ++k) {
    inj.p_high.emplace_back(-loaded.demand.p_load[k]);
    inj.p_low.emplace_back(-loaded.demand.p_load[k]);
    inj.q.emplace_back(-loaded.demand.q_load[k]);
  }
  auto sys = build_cia_constraints(mats, op, inj, vars, loaded.feeder.v0);
  CHECK(sys.bound_definitions.size() == 6 * n);
  CHECK(sys.lower_bound_equalities.size() == n);
  CHECK(sys.lower_bound_clamps.empty());
  CHECK(sys.epigraph_linear.size() == 4 * n);
  CHECK(sys.epigraph_quadratic.size() == 8 * n);
  CHECK(sys.upper_links.size() == n);
  auto clamped = build_cia_constraints(mats, op, inj, vars, loaded.feeder.v0, true);
  CHECK(clamped.lower_bound_clamps.size() == n);

  sys.add_to(prog);
  CHECK(prog.equalities().size() == 7 * n);
  CHECK(prog.quadratics().size() == 8 * n);
}

TEST_CASE("certified bounds contain every sampled exact solution") {
  for (const char* name : {"three_node.json", "eight_node.json", "ieee37.json"}) {
    CAPTURE(name);
    auto loaded = load_feeder_file(fixtures::data_path(std::string("feeders/") + name));
    const auto& f = loaded.feeder;
    const auto& dem = loaded.demand;
    const auto n = f.node_count;
    auto mats = build_matrices(f);
    auto op = compute_operating_point(f, dem);

    opt::ConvexProgram prog;
    auto vars = add_cia_variables(prog, n);
    auto g = prog.add_variable("g", n, 0.0, 0.4);
    CiaInjections inj;
    opt::AffineExpr total;
    for (std::size_t k = 0; k < n; ++k) {
      inj.p_high.push_back(opt::AffineExpr::variable(g[k]) + opt::AffineExpr(-dem.p_load[k]));
      inj.p_low.emplace_back(-dem.p_load[k]);
      inj.q.emplace_back(-dem.q_load[k]);
      total.add(g[k], 1.0);
    }
    build_cia_constraints(mats, op, inj, vars, f.v0).add_to(prog);
    add_network_limits(prog, f, vars);
    prog.set_objective(total, opt::Sense::maximize);
    auto sol = opt::solve(prog);
    REQUIRE(sol.optimal());

    auto gv = sol.value(g);
    auto Vp = sol.value(vars.V_plus), Vm = sol.value(vars.V_minus);
    auto llb = sol.value(vars.l_lb), lub = sol.value(vars.l_ub);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 200; ++s) {
      std::vector<double> p(n), q(n);
      for (std::size_t k = 0; k < n; ++k) {
        p[k] = gv[k] * (s < 2 ? double(s) : u(rng)) - dem.p_load[k];
        q[k] = -dem.q_load[k];
      }
      auto flow = solve_distflow(f, p, q);
      REQUIRE(flow.converged);
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(flow.l[k] >= llb[k] - 1e-6);
        CHECK(flow.l[k] <= lub[k] + 1e-6);
        CHECK(flow.V[k] >= Vm[k] - 1e-6);
        CHECK(flow.V[k] <= Vp[k] + 1e-6);
      }
    }
  }
}

TEST_CASE("operating-point dump has one row per branch") {
  auto op = compute_operating_point(fixtures::path(3), DemandProfile::zeros(3));
  auto path = std::filesystem::temp_directory_path() / "gridmarket_op_dump.csv";
  dump_operating_point_csv(op, path);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
  std::filesystem::remove(path);
}
