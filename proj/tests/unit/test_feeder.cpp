#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "fixtures.hpp"
#include "gridmarket/feeder.hpp"

using namespace gridmarket;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int node_by_name(const FeederModel& f, const std::string& name) {
  for (std::size_t i = 1; i <= f.node_count; ++i)
    if (f.node_names[i] == name) return static_cast<int>(i);
  return -1;
}

// Positive-sequence impedance in ohm per mile from a 3x3 phase matrix.
std::complex<double> positive_sequence(const std::complex<double> z[3][3]) {
  std::complex<double> self = (z[0][0] + z[1][1] + z[2][2]) / 3.0;
  std::complex<double> mutual = (z[0][1] + z[0][2] + z[1][2]) / 3.0;
  return self - mutual;
}

bool is_root_to_leaf(const FeederModel& f) {
  std::vector<int> pos(f.node_count + 1, -1);
  pos[0] = -1;
  for (std::size_t i = 0; i < f.order.size(); ++i) pos[static_cast<std::size_t>(f.order[i])] = static_cast<int>(i);
  for (std::size_t n = 1; n <= f.node_count; ++n) {
    int p = f.parent(static_cast<int>(n));
    if (p != 0 && pos[static_cast<std::size_t>(p)] >= pos[n]) return false;
  }
  return f.order.size() == f.node_count;
}

}  // namespace

TEST_CASE("three-node feeder loads with demand and limits") {
  auto loaded = load_feeder_file(fixtures::data_path("feeders/three_node.json"));
  const auto& f = loaded.feeder;
  CHECK(f.node_count == 2);
  CHECK(f.parent(1) == 0);
  CHECK(f.parent(2) == 1);
  CHECK(f.branch_into(2).r == doctest::Approx(0.02));
  CHECK(f.branch_into(2).x == doctest::Approx(0.04));
  CHECK(loaded.demand.p_load[0] == doctest::Approx(0.3));
  CHECK(loaded.demand.q_load[1] == doctest::Approx(0.05));
  CHECK(loaded.demand.d_plus[1] == doctest::Approx(0.05));
  CHECK(f.order == std::vector<int>{1, 2});
}

TEST_CASE("cycle and disconnection are rejected as not radial") {
  std::vector<Branch> cyc = {{0, 1, 0.1, 0.1, 1}, {1, 2, 0.1, 0.1, 1}, {2, 1, 0.1, 0.1, 1}};
  try {
    validate_radial(2, cyc);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("not radial") != std::string::npos);
  }
  std::vector<Branch> tri = {{0, 1, 0.1, 0.1, 1}, {1, 2, 0.1, 0.1, 1}, {2, 0, 0.1, 0.1, 1}};
  CHECK_THROWS_AS(validate_radial(2, tri), InputError);
  std::vector<Branch> split = {{0, 1, 0.1, 0.1, 1}, {2, 3, 0.1, 0.1, 1}, {3, 2, 0.1, 0.1, 1}};
  CHECK_THROWS_AS(validate_radial(3, split), InputError);
}

TEST_CASE("feeder files with extra or missing branches are rejected") {
  const char* extra = R"({"base_mva": 1, "base_kv": 4.16, "v0_pu2": 1.0,
    "nodes": [{"id": 0}, {"id": 1}, {"id": 2}],
    "branches": [{"from": 0, "to": 1, "r_pu": 0.01, "x_pu": 0.01, "l_max_pu2": 1},
                 {"from": 1, "to": 2, "r_pu": 0.01, "x_pu": 0.01, "l_max_pu2": 1},
                 {"from": 2, "to": 1, "r_pu": 0.01, "x_pu": 0.01, "l_max_pu2": 1}]})";
  CHECK_THROWS_WITH_AS(parse_feeder_json(extra), doctest::Contains("not radial"), InputError);
  const char* missing = R"({"base_mva": 1, "base_kv": 4.16, "v0_pu2": 1.0,
    "nodes": [{"id": 0}, {"id": 1}, {"id": 2}],
    "branches": [{"from": 0, "to": 1, "r_pu": 0.01, "x_pu": 0.01, "l_max_pu2": 1}]})";
  CHECK_THROWS_WITH_AS(parse_feeder_json(missing), doctest::Contains("not radial"), InputError);
}

TEST_CASE("branch orientation is normalized to parent to child") {
  FeederModel f;
  f.node_count = 3;
  f.branches = {{2, 1, 0.1, 0.2, 1}, {1, 0, 0.1, 0.2, 1}, {3, 1, 0.1, 0.2, 1}};
  f.v_min.assign(3, 0.9);
  f.v_max.assign(3, 1.1);
  f = finalize_feeder(f);
  for (std::size_t k = 0; k < 3; ++k) CHECK(f.branches[k].to == static_cast<int>(k + 1));
  CHECK(f.parent(2) == 1);
  CHECK(f.parent(3) == 1);
  CHECK(is_root_to_leaf(f));
}

TEST_CASE("invalid feeder data lists every problem") {
  FeederModel f;
  f.node_count = 2;
  f.branches = {{0, 1, -0.1, 0.2, 1}, {1, 2, 0.0, 0.0, 0.0}};
  f.v_min = {0.9, 1.2};
  f.v_max = {1.1, 1.1};
  try {
    finalize_feeder(f);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(e.problems().size() >= 4);
  }
}

TEST_CASE("37-node reconstruction: size, order and impedances") {
  auto f = load_feeder(fixtures::data_path("feeders/ieee37.json"));
  CHECK(f.node_count == 36);
  CHECK(is_root_to_leaf(f));
  CHECK(f.name(0) == "799");

  using C = std::complex<double>;
  const double z_base = 4.8 * 4.8 / 1.0;
  const C z721[3][3] = {{C(0.2926, 0.1973), C(0.0673, -0.0368), C(0.0337, -0.0417)},
                        {C(0.0673, -0.0368), C(0.2646, 0.1900), C(0.0673, -0.0368)},
                        {C(0.0337, -0.0417), C(0.0673, -0.0368), C(0.2926, 0.1973)}};
  const C z722[3][3] = {{C(0.4751, 0.2973), C(0.1629, -0.0326), C(0.1234, -0.0607)},
                        {C(0.1629, -0.0326), C(0.4488, 0.2678), C(0.1629, -0.0326)},
                        {C(0.1234, -0.0607), C(0.1629, -0.0326), C(0.4751, 0.2973)}};
  const C z723[3][3] = {{C(1.2936, 0.6713), C(0.4871, 0.2111), C(0.4585, 0.1521)},
                        {C(0.4871, 0.2111), C(1.3022, 0.6326), C(0.4871, 0.2111)},
                        {C(0.4585, 0.1521), C(0.4871, 0.2111), C(1.2936, 0.6713)}};

  struct Spot {
    const char* to;
    const C (*z)[3];
    double feet;
  };
  const Spot spots[] = {{"701", z721, 1850}, {"702", z722, 960}, {"733", z723, 320}};
  for (const auto& s : spots) {
    int node = node_by_name(f, s.to);
    REQUIRE(node > 0);
    C z = positive_sequence(s.z) * (s.feet / 5280.0) / z_base;
    CHECK(f.branch_into(node).r == doctest::Approx(z.real()).epsilon(1e-8));
    CHECK(f.branch_into(node).x == doctest::Approx(z.imag()).epsilon(1e-8));
  }

  int xfm = node_by_name(f, "775");
  REQUIRE(xfm > 0);
  CHECK(f.name(f.parent(xfm)) == "709");
  CHECK(f.branch_into(xfm).r == doctest::Approx(0.0009 / 0.5));
  CHECK(f.branch_into(xfm).x == doctest::Approx(0.0181 / 0.5));
}

TEST_CASE("JSON and CSV feeders are equivalent") {
  for (const char* name : {"three_node", "ieee37"}) {
    auto a = load_feeder_file(fixtures::data_path(std::string("feeders/") + name + ".json"));
    auto b = load_feeder_file(fixtures::data_path(std::string("feeders/") + name + ".csv"));
    REQUIRE(a.feeder.node_count == b.feeder.node_count);
    CHECK(a.feeder.v0 == doctest::Approx(b.feeder.v0));
    CHECK(a.feeder.order == b.feeder.order);
    for (std::size_t k = 0; k < a.feeder.node_count; ++k) {
      CHECK(a.feeder.branches[k].from == b.feeder.branches[k].from);
      CHECK(a.feeder.branches[k].r == doctest::Approx(b.feeder.branches[k].r));
      CHECK(a.feeder.branches[k].x == doctest::Approx(b.feeder.branches[k].x));
      CHECK(a.feeder.branches[k].l_max == doctest::Approx(b.feeder.branches[k].l_max));
      CHECK(a.feeder.v_min[k] == doctest::Approx(b.feeder.v_min[k]));
      CHECK(a.demand.p_load[k] == doctest::Approx(b.demand.p_load[k]));
      CHECK(a.demand.q_load[k] == doctest::Approx(b.demand.q_load[k]));
      CHECK(a.demand.d_plus[k] == doctest::Approx(b.demand.d_plus[k]));
    }
  }
}

TEST_CASE("bid files: kW prices, CSV mirror and lower ranges") {
  auto f = load_feeder(fixtures::data_path("feeders/ieee37.json"));
  auto json = load_bids(fixtures::data_path("bids/ieee37_case2.json"), f);
  auto csv = load_bids(fixtures::data_path("bids/ieee37_case2.csv"), f);
  REQUIRE(json.size() == 4);
  REQUIRE(csv.size() == 4);
  // Node 701 is node 1; its price column for agg1..agg4 in $/kW.
  const double kw[] = {9.8, 4.6, 29.1, 13.2};
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(json[m].k[0] == doctest::Approx(kw[m] * 1000.0));
    for (std::size_t k = 0; k < f.node_count; ++k) {
      CHECK(json[m].k[k] == doctest::Approx(csv[m].k[k]));
      CHECK(json[m].p_bid[k] == doctest::Approx(csv[m].p_bid[k]));
    }
  }

  auto small = load_feeder(fixtures::data_path("feeders/three_node.json"));
  auto b = load_bids(fixtures::data_path("bids/three_node.json"), small);
  auto c = load_bids(fixtures::data_path("bids/three_node.csv"), small);
  REQUIRE(b[0].offers_lower());
  CHECK(b[0].p_bid_lower[1] == doctest::Approx(0.5));
  CHECK(c[1].p_bid_lower[1] == doctest::Approx(0.7));
}

TEST_CASE("negative price or capacity is rejected") {
  auto f = fixtures::path(2);
  CHECK_THROWS_AS(parse_bids_json(R"({"aggregators":[{"id":"a","nodal":[{"node":1,"p_bid_mw":1,"k_per_mw":-2}]}]})", f),
                  InputError);
  CHECK_THROWS_AS(parse_bids_json(R"({"aggregators":[{"id":"a","nodal":[{"node":1,"p_bid_mw":-1,"k_per_mw":2}]}]})", f),
                  InputError);
  CHECK_THROWS_AS(parse_bids_json(R"({"aggregators":[{"id":"a","nodal":[{"node":9,"p_bid_mw":1,"k_per_mw":2}]}]})", f),
                  InputError);
  CHECK_THROWS_AS(parse_bids_csv("a,1,1,2\na,1,1,3\n", f), InputError);
}

TEST_CASE("zero bids load and validate") {
  MarketScenario s;
  s.feeder = fixtures::path(2);
  s.demand = DemandProfile::zeros(2);
  s.bids = parse_bids_json(R"({"aggregators":[{"id":"a","nodal":[{"node":1,"p_bid_mw":0,"k_per_mw":0}]}]})", s.feeder);
  CHECK_NOTHROW(s.validate());
  CHECK(s.flexible_nodes().empty());
}

TEST_CASE("per-unit conversions round-trip") {
  for (double base : {1.0, 2.5, 100.0}) {
    for (double mw : {0.0, 0.3, 7.25, 1234.5}) {
      CHECK(pu_to_mw(mw_to_pu(mw, base), base) == doctest::Approx(mw).epsilon(1e-15));
      CHECK(price_per_pu_to_per_mw(price_per_mw_to_per_pu(mw, base), base) == doctest::Approx(mw).epsilon(1e-15));
    }
  }
  CHECK(mw_to_pu(5.0, 10.0) == doctest::Approx(0.5));
  CHECK(price_per_mw_to_per_pu(3.0, 10.0) == doctest::Approx(30.0));
}

TEST_CASE("direction parsing") {
  CHECK(direction_from_string("upper") == Direction::upper);
  CHECK(direction_from_string("lower") == Direction::lower);
  CHECK_THROWS_AS(direction_from_string("up"), InputError);
}
