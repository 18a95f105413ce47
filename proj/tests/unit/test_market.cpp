#include <cmath>
#include <numeric>

#include <doctest.h>

#include "fixtures.hpp"
#include "gridmarket/compare.hpp"
#include "gridmarket/market.hpp"

using namespace gridmarket;

namespace {

MarketScenario single_node(double r, std::vector<AggregatorBid> bids) {
  MarketScenario s;
  s.feeder = fixtures::two_node(r, r);
  s.demand = DemandProfile::zeros(1);
  s.bids = std::move(bids);
  return s;
}

AllocationResult table(std::vector<std::vector<double>> alloc_mw, std::vector<std::vector<double>> price,
                       double base_mva = 1.0) {
  AllocationResult r;
  r.base_mva = base_mva;
  for (std::size_t m = 0; m < alloc_mw.size(); ++m) {
    r.aggregator_ids.push_back("a" + std::to_string(m));
    std::vector<double> pu;
    for (double a : alloc_mw[m]) pu.push_back(mw_to_pu(a, base_mva));
    r.allocation.push_back(pu);
    r.bid.push_back(pu);
  }
  r.price = std::move(price);
  return r;
}

void check_price_bound(const AllocationResult& r) {
  const double eligible = mw_to_pu(kPriceEligibilityMw, r.base_mva);
  for (std::size_t k = 0; k < r.clearing_price.size(); ++k) {
    if (!r.clearing_price[k]) continue;
    bool attained = false;
    for (std::size_t m = 0; m < r.allocation.size(); ++m) {
      if (r.allocation[m][k] <= eligible) continue;
      CHECK(*r.clearing_price[k] <= r.price[m][k]);
      attained = attained || *r.clearing_price[k] == r.price[m][k];
    }
    CHECK(attained);
  }
}

double revenue_by_hand(const AllocationResult& r) {
  double sum = 0.0;
  for (std::size_t k = 0; k < r.clearing_price.size(); ++k)
    for (std::size_t m = 0; m < r.allocation.size(); ++m)
      if (r.clearing_price[k]) sum += *r.clearing_price[k] * pu_to_mw(r.allocation[m][k], r.base_mva);
  return sum;
}

}  // namespace

TEST_CASE("one node, two aggregators: the higher price is served first") {
  auto s = single_node(0.05, {fixtures::bid("high", {1.0}, {10.0}), fixtures::bid("low", {1.0}, {5.0})});
  // Capacity of the node under the inner approximation, from an independent LP.
  const double cap = cia_limit(s.feeder, s.demand, 10.0, {1}).total;
  REQUIRE(cap > 0.5);
  REQUIRE(cap < 2.0);

  auto f = step1_feasibility(s);
  CHECK_FALSE(f.feasible);
  CHECK(f.max_slack == doctest::Approx(2.0 - cap).epsilon(1e-6));

  auto r = step2_allocate(s);
  CHECK(r.allocation[0][0] == doctest::Approx(std::min(1.0, cap)).epsilon(1e-6));
  CHECK(r.allocation[1][0] == doctest::Approx(std::max(0.0, cap - 1.0)).epsilon(1e-6));
  CHECK(r.objective == doctest::Approx(10.0 * std::min(1.0, cap) + 5.0 * std::max(0.0, cap - 1.0)).epsilon(1e-6));
}

TEST_CASE("one node: the cheaper offer takes the remainder and sets the price") {
  auto s = single_node(0.05, {fixtures::bid("a", {0.6}, {10.0}), fixtures::bid("b", {0.6}, {5.0})});
  auto r = step2_allocate(s);
  const double cap = cia_limit(s.feeder, s.demand, 10.0, {1}).total;
  CHECK(r.allocation[0][0] == doctest::Approx(0.6));
  CHECK(r.allocation[1][0] == doctest::Approx(std::min(0.6, cap - 0.6)).epsilon(1e-6));
  REQUIRE(r.clearing_price[0]);
  CHECK(*r.clearing_price[0] == 5.0);
}

TEST_CASE("clearing price is the lowest allocated offer") {
  // Four aggregators at one node with prices 12.9, 3.60, 21.0 and 1.3.
  auto r = table({{0.5}, {0.5}, {0.4}, {0.55}}, {{12.9}, {3.60}, {21.0}, {1.3}});
  auto k = clearing_prices(r);
  REQUIRE(k[0]);
  CHECK(*k[0] == 1.3);

  auto single = table({{0.3}}, {{4.2}});
  CHECK(*clearing_prices(single)[0] == 4.2);

  auto empty = table({{0.0, 0.5}}, {{9.0, 2.0}});
  auto ke = clearing_prices(empty);
  CHECK_FALSE(ke[0]);
  CHECK(*ke[1] == 2.0);

  auto tiny = table({{1e-8}, {0.5}}, {{1.0}, {7.0}});
  CHECK(*clearing_prices(tiny)[0] == 7.0);
}

TEST_CASE("marginal rule uses the lowest offer at a curtailed node") {
  auto r = table({{0.5}, {0.0}}, {{8.0}, {3.0}});
  r.bid[1][0] = 0.4;
  CHECK(*clearing_prices(r, PriceRule::min_allocated)[0] == 8.0);
  CHECK(*clearing_prices(r, PriceRule::marginal)[0] == 3.0);
}

TEST_CASE("revenue") {
  auto r = table({{2.0}, {1.0}}, {{5.0}, {6.0}}, 10.0);
  CHECK(dno_revenue(r, {5.0}) == doctest::Approx(15.0).epsilon(1e-15));
  auto zero = table({{0.0, 0.0}}, {{5.0, 6.0}});
  CHECK(dno_revenue(zero, clearing_prices(zero)) == 0.0);
  finalize_allocation(r);
  CHECK(r.revenue == doctest::Approx(15.0).epsilon(1e-15));
}

TEST_CASE("tiny bids are accepted in full") {
  auto s = fixtures::scenario("three_node.json", "three_node_tiny.json");
  auto f = step1_feasibility(s);
  CHECK(f.feasible);
  CHECK(f.max_slack <= f.epsilon);
  auto r = step2_allocate(s);
  for (std::size_t m = 0; m < s.bids.size(); ++m)
    for (std::size_t k = 0; k < s.feeder.node_count; ++k) CHECK(std::abs(r.allocation[m][k] - s.bids[m].p_bid[k]) < 1e-6);
  auto out = run_market(s);
  CHECK(out.accepted_all());
}

TEST_CASE("scaled-down 37-node bids need no curtailment") {
  auto s = fixtures::scenario("ieee37.json", "ieee37_case1.json");
  for (auto& b : s.bids)
    for (auto& p : b.p_bid) p *= 0.01;
  auto f = step1_feasibility(s);
  CHECK(f.max_slack <= f.epsilon);
  CHECK(f.feasible);
  auto box = bid_box(s);
  auto audit = sample_box_admissibility(s.feeder, s.demand, box.lower, box.upper, 200, 1);
  CHECK(audit.clean());
}

TEST_CASE("step 2 allocations respect the offers and the price bound") {
  for (auto [feeder, bids, dir] : {std::tuple{"three_node.json", "three_node.json", Direction::upper},
                                   std::tuple{"three_node.json", "three_node.json", Direction::lower},
                                   std::tuple{"eight_node.json", "eight_node.json", Direction::upper},
                                   std::tuple{"ieee37.json", "ieee37_case1.json", Direction::upper},
                                   std::tuple{"ieee37.json", "ieee37_case2.json", Direction::upper}}) {
    CAPTURE(feeder);
    CAPTURE(bids);
    auto s = fixtures::scenario(feeder, bids, dir);
    auto r = step2_allocate(s);
    for (std::size_t m = 0; m < s.bids.size(); ++m)
      for (std::size_t k = 0; k < s.feeder.node_count; ++k) {
        CHECK(r.allocation[m][k] >= 0.0);
        CHECK(r.allocation[m][k] <= s.capacity(m, static_cast<int>(k + 1)));
      }
    check_price_bound(r);
    CHECK(r.revenue == doctest::Approx(revenue_by_hand(r)).epsilon(1e-12));
    CHECK(r.revenue <= r.objective + 1e-6);
    auto audit = audit_allocation(s, r, 200, 1);
    CHECK(audit.clean());
  }
}

TEST_CASE("enlarging an offer never lowers the objective") {
  auto s = fixtures::scenario("three_node.json", "three_node.json");
  const double base = step2_allocate(s).objective;
  s.bids[1].p_bid[0] *= 1.5;
  const double more = step2_allocate(s).objective;
  CHECK(more >= base - 1e-6 * std::max(1.0, base));
}

TEST_CASE("scaling every price scales the objective") {
  auto s = fixtures::scenario("eight_node.json", "eight_node.json");
  auto base = step2_allocate(s);
  for (double alpha : {0.1, 3.0}) {
    auto scaled = s;
    for (auto& b : scaled.bids)
      for (auto& k : b.k) k *= alpha;
    auto r = step2_allocate(scaled);
    CHECK(r.objective == doctest::Approx(alpha * base.objective).epsilon(1e-6));
    double at_base_prices = 0.0;
    for (std::size_t m = 0; m < s.bids.size(); ++m)
      for (std::size_t k = 0; k < s.feeder.node_count; ++k)
        at_base_prices += s.bids[m].k[k] * pu_to_mw(r.allocation[m][k], s.feeder.base_mva);
    CHECK(at_base_prices == doctest::Approx(base.objective).epsilon(1e-6));
  }
}

TEST_CASE("robust clearing is no larger than deterministic clearing") {
  for (const char* bids : {"ieee37_case1.json", "ieee37_case2.json"}) {
    auto det = step2_allocate(fixtures::scenario("ieee37.json", bids));
    auto rob = step2_allocate(fixtures::scenario("ieee37.json", bids, Direction::upper, true));
    CHECK(rob.objective <= det.objective + 1e-6 * det.objective);
    CHECK(rob.total() < det.total());
  }
}

TEST_CASE("background demand beyond the limits is diagnosed") {
  MarketScenario s = single_node(0.1, {fixtures::bid("a", {0.1}, {1.0})});
  s.demand.p_load[0] = 0.5;
  try {
    step2_allocate(s);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("background demand") != std::string::npos);
    CHECK(e.status() == opt::Status::infeasible);
  }
}

TEST_CASE("accept-all result mirrors the offers") {
  auto s = fixtures::scenario("three_node.json", "three_node_tiny.json");
  auto r = accept_all(s);
  for (std::size_t m = 0; m < s.bids.size(); ++m)
    for (std::size_t k = 0; k < s.feeder.node_count; ++k) CHECK(r.allocation[m][k] == s.bids[m].p_bid[k]);
  for (const auto& frac : r.nodal_fraction)
    if (frac) CHECK(*frac == 1.0);
}

TEST_CASE("price rule names") {
  CHECK(price_rule_from_string("marginal") == PriceRule::marginal);
  CHECK(to_string(PriceRule::min_allocated) == "min-allocated");
  CHECK_THROWS_AS(price_rule_from_string("uniform"), InputError);
}
