#include <algorithm>

#include <doctest.h>

#include <json.hpp>

#include "fixtures.hpp"
#include "gridmarket/report.hpp"

using namespace gridmarket;

TEST_CASE("twelve significant digits") {
  CHECK(format12(1.0 / 3.0) == "0.333333333333");
  CHECK(format12(2.04999999999999) == "2.05");
  CHECK(round12(44350.88123456789) == 44350.8812346);
  CHECK(round12(0.0) == 0.0);
}

TEST_CASE("reports are deterministic and complete") {
  auto s = fixtures::scenario("three_node.json", "three_node.json");
  auto f = step1_feasibility(s);
  auto r = step2_allocate(s);
  const auto a = allocation_json(s, r, false);
  CHECK(a == allocation_json(s, step2_allocate(s), false));
  auto doc = nlohmann::json::parse(a);
  CHECK(doc.contains("dno_revenue"));
  CHECK(doc.contains("nodes"));
  auto fdoc = nlohmann::json::parse(feasibility_json(s, f));
  CHECK(fdoc.contains("max_slack_mw"));

  const auto csv = prices_csv(s, r);
  CHECK(csv.rfind("node,name,clearing_price_per_mw,allocated_mw,offered_mw,nodal_fraction\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  auto audit = audit_allocation(s, r, 20, 5);
  auto adoc = nlohmann::json::parse(audit_json(s, audit, 20, 5));
  CHECK(adoc["seed"] == 5);
}

TEST_CASE("compare CSV header") {
  CompareRow row{"cia", 1.0, "optimal", 0.5, 1.01, 1.009, 1.05};
  auto csv = compare_csv({row});
  CHECK(csv.rfind("p_max_mw,method,status,injection_mw,claimed_max_v_pu,true_max_v_pu,v_limit_pu,violates\n", 0) == 0);
  CHECK(csv.find("cia") != std::string::npos);
}
