#include <cmath>
#include <cstdlib>
#include <sstream>

#include <doctest.h>

#include "gridmarket/convex_program.hpp"

using namespace gridmarket::opt;

TEST_CASE("builder records variables and rows") {
  ConvexProgram p;
  auto x = p.add_variable("x", 1);
  p.add_affine_ineq(-1.0 * AffineExpr::variable(x[0]), -3.0);
  p.set_objective(AffineExpr::variable(x[0]), Sense::minimize);
  CHECK(p.num_variables() == 1);
  CHECK(p.inequalities().size() == 1);
  CHECK(p.equalities().empty());
}

TEST_CASE("builder rejects malformed input") {
  ConvexProgram p;
  auto x = p.add_variable("x", 2);
  CHECK_THROWS_AS(p.add_affine_eq({x[0], x[1]}, {1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(p.add_affine_ineq(AffineExpr::variable(5), 0.0), std::out_of_range);
  CHECK_THROWS_AS(p.add_variable("z", 0), std::invalid_argument);
  CHECK_THROWS_AS(p.add_variable("w", 1, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(p.add_convex_quad({x[0]}, {{1.0}}, {0.0, 1.0}, AffineExpr(-4.0)), std::invalid_argument);
}

TEST_CASE("hand-solvable programs") {
  SUBCASE("min x s.t. x >= 3") {
    ConvexProgram p;
    auto x = p.add_variable("x", 1, 3.0);
    p.set_objective(AffineExpr::variable(x[0]), Sense::minimize);
    auto s = solve(p);
    REQUIRE(s.optimal());
    CHECK(s.value(x[0]) == doctest::Approx(3.0).epsilon(1e-7));
  }
  SUBCASE("max p s.t. 0 <= p <= 5") {
    ConvexProgram p;
    auto v = p.add_variable("p", 1, 0.0, 5.0);
    p.set_objective(AffineExpr::variable(v[0]), Sense::maximize);
    auto s = solve(p);
    REQUIRE(s.optimal());
    CHECK(s.value(v[0]) == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(s.objective == doctest::Approx(5.0).epsilon(1e-7));
  }
  SUBCASE("max x s.t. x^2 <= 4") {
    ConvexProgram p;
    auto x = p.add_variable("x", 1);
    p.add_convex_quad({x[0]}, {{1.0}}, {0.0}, AffineExpr(-4.0));
    p.set_objective(AffineExpr::variable(x[0]), Sense::maximize);
    auto s = solve(p);
    REQUIRE(s.optimal());
    CHECK(s.value(x[0]) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(s.max_violation < 1e-6);
  }
  SUBCASE("second-order cone") {
    // max x + y s.t. ||(x, y)|| <= 1 gives x = y = 1/sqrt(2).
    ConvexProgram p;
    auto v = p.add_variable("v", 2);
    p.add_soc({AffineExpr::variable(v[0]), AffineExpr::variable(v[1])}, AffineExpr(1.0));
    p.set_objective(AffineExpr::variable(v[0]) + AffineExpr::variable(v[1]), Sense::maximize);
    auto s = solve(p);
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  }
}

TEST_CASE("infeasible and unbounded programs are reported as such") {
  ConvexProgram inf;
  auto x = inf.add_variable("x", 1, 0.0, 1.0);
  inf.add_affine_ineq(-1.0 * AffineExpr::variable(x[0]), -2.0);
  inf.set_objective(AffineExpr::variable(x[0]), Sense::minimize);
  auto s = solve(inf);
  CHECK(s.status == Status::infeasible);
  CHECK(s.x.empty());

  ConvexProgram unb;
  auto y = unb.add_variable("y", 1, 0.0);
  unb.set_objective(AffineExpr::variable(y[0]), Sense::maximize);
  CHECK(solve(unb).status == Status::unbounded);
}

TEST_CASE("objective scaling leaves the optimum value consistent") {
  auto build = [](double alpha) {
    ConvexProgram p;
    auto v = p.add_variable("v", 3, 0.0, 1.0);
    p.add_affine_ineq({v[0], v[1], v[2]}, {1.0, 2.0, 1.0}, 2.5);
    p.add_convex_quad({v[0], v[2]}, {{1.0, 0.0}, {0.0, 2.0}}, {0.0, 0.0}, AffineExpr(-1.0));
    AffineExpr obj;
    obj.add(v[0], 3.0 * alpha).add(v[1], 1.0 * alpha).add(v[2], 2.0 * alpha);
    p.set_objective(obj, Sense::maximize);
    return std::make_pair(p, v);
  };
  auto [base, vb] = build(1.0);
  auto ref = solve(base);
  REQUIRE(ref.optimal());
  for (double alpha : {0.01, 7.0, 1000.0}) {
    auto [scaled, vs] = build(alpha);
    auto s = solve(scaled);
    REQUIRE(s.optimal());
    const double recomputed = 3.0 * s.value(vs[0]) + s.value(vs[1]) + 2.0 * s.value(vs[2]);
    CHECK(recomputed == doctest::Approx(ref.objective).epsilon(1e-6));
  }
}

TEST_CASE("repeated solves are identical") {
  ConvexProgram p;
  auto v = p.add_variable("v", 2, -1.0, 1.0);
  p.add_convex_quad({v[0], v[1]}, {{1.0, 1.0}}, {0.0}, AffineExpr(-0.5));
  p.set_objective(AffineExpr::variable(v[0]) - AffineExpr::variable(v[1]), Sense::maximize);
  auto a = solve(p), b = solve(p);
  CHECK(a.status == b.status);
  CHECK(a.x == b.x);
}

TEST_CASE("independent feasibility check") {
  ConvexProgram p;
  auto v = p.add_variable("v", 2, 0.0, 1.0);
  p.add_affine_eq({v[0], v[1]}, {1.0, 1.0}, 1.0);
  CHECK(p.max_violation({0.5, 0.5}) < 1e-15);
  CHECK(p.max_violation({0.5, 0.7}) == doctest::Approx(0.2));
  CHECK(p.max_violation({1.5, -0.5}) == doctest::Approx(0.5));
}

TEST_CASE("backend selection") {
  CHECK(make_backend("ecos")->name() == "ecos");
  CHECK_THROWS_AS(make_backend("nonexistent"), BackendUnavailable);
}

TEST_CASE("LP export names every row") {
  ConvexProgram p;
  auto v = p.add_variable("flex", 2, 0.0, 1.0);
  p.add_affine_ineq({v[0], v[1]}, {1.0, 1.0}, 1.5, "cap");
  p.add_convex_quad({v[0]}, {{1.0}}, {0.0}, AffineExpr(-1.0), "disk");
  p.set_objective(AffineExpr::variable(v[0]), Sense::maximize);
  std::ostringstream out;
  p.write_lp(out);
  const auto text = out.str();
  CHECK(text.find("cap") != std::string::npos);
  CHECK(text.find("disk") != std::string::npos);
  CHECK(text.find("flex") != std::string::npos);
  std::ostringstream again;
  p.write_lp(again);
  CHECK(again.str() == text);
}
