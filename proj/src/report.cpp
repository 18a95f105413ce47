#include "gridmarket/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace gridmarket {

using nlohmann::ordered_json;

double round12(double value) {
  if (!std::isfinite(value)) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return std::strtod(buf, nullptr);
}

std::string format12(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

namespace {

ordered_json num(double value) {
  if (!std::isfinite(value)) return nullptr;
  return round12(value);
}

ordered_json opt_num(const std::optional<double>& value) { return value ? num(*value) : ordered_json(nullptr); }

double mw(const MarketScenario& s, double pu) { return pu_to_mw(pu, s.feeder.base_mva); }

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json stats_json(const opt::SolveStats& st) {
  // Wall time is left out so reports stay byte-identical between runs.
  return {{"backend", st.backend}, {"iterations", st.iterations}, {"exit_code", st.backend_exit}};
}

}  // namespace

std::string feasibility_json(const MarketScenario& s, const FeasibilityResult& r) {
  ordered_json slack = ordered_json::array();
  for (std::size_t k = 0; k < r.slack.size(); ++k) {
    const int node = static_cast<int>(k + 1);
    slack.push_back({{"node", node}, {"name", s.feeder.name(node)}, {"slack_mw", num(mw(s, r.slack[k]))}});
  }
  ordered_json j{{"direction", to_string(r.direction)},
                 {"robust", r.robust},
                 {"feasible", r.feasible},
                 {"max_slack_mw", num(r.max_slack_mw())},
                 {"epsilon_mw", num(mw(s, r.epsilon))},
                 {"slack", slack},
                 {"solver", stats_json(r.stats)}};
  return dump(j);
}

std::string allocation_json(const MarketScenario& s, const AllocationResult& r, bool accepted_all) {
  const std::size_t n = s.feeder.node_count;
  ordered_json aggs = ordered_json::array();
  for (std::size_t m = 0; m < r.allocation.size(); ++m) {
    ordered_json nodal = ordered_json::array();
    for (std::size_t k = 0; k < n; ++k) {
      if (!(r.bid[m][k] > 0.0)) continue;
      const int node = static_cast<int>(k + 1);
      nodal.push_back({{"node", node},
                       {"bid_mw", num(mw(s, r.bid[m][k]))},
                       {"k_per_mw", num(r.price[m][k])},
                       {"allocated_mw", num(mw(s, r.allocation[m][k]))}});
    }
    aggs.push_back({{"id", r.aggregator_ids[m]},
                    {"fraction", opt_num(r.aggregator_fraction[m])},
                    {"nodal", nodal}});
  }
  ordered_json nodes = ordered_json::array();
  for (std::size_t k = 0; k < n; ++k) {
    if (!r.nodal_fraction[k]) continue;
    const int node = static_cast<int>(k + 1);
    nodes.push_back({{"node", node},
                     {"name", s.feeder.name(node)},
                     {"allocated_mw", num(mw(s, r.node_total(node)))},
                     {"clearing_price_per_mw", opt_num(r.clearing_price[k])},
                     {"fraction", opt_num(r.nodal_fraction[k])}});
  }
  ordered_json j{{"direction", to_string(r.direction)},
                 {"robust", r.robust},
                 {"outcome", accepted_all ? "accepted-all" : "cleared"},
                 {"total_allocated_mw", num(mw(s, r.total()))},
                 {"objective", num(r.objective)},
                 {"dno_revenue", num(r.revenue)},
                 {"tie_nodes", r.tie_nodes},
                 {"nodes", nodes},
                 {"aggregators", aggs}};
  if (!accepted_all) j["solver"] = stats_json(r.stats);
  return dump(j);
}

std::string prices_csv(const MarketScenario& s, const AllocationResult& r) {
  std::ostringstream out;
  out << "node,name,clearing_price_per_mw,allocated_mw,offered_mw,nodal_fraction\n";
  for (std::size_t k = 0; k < r.clearing_price.size(); ++k) {
    if (!r.nodal_fraction[k]) continue;
    const int node = static_cast<int>(k + 1);
    double offered = 0.0;
    for (const auto& b : r.bid) offered += b[k];
    out << node << ',' << s.feeder.name(node) << ','
        << (r.clearing_price[k] ? format12(*r.clearing_price[k]) : std::string()) << ','
        << format12(mw(s, r.node_total(node))) << ',' << format12(mw(s, offered)) << ','
        << format12(*r.nodal_fraction[k]) << '\n';
  }
  return out.str();
}

std::string allocation_csv(const MarketScenario& s, const AllocationResult& r) {
  std::ostringstream out;
  out << "aggregator,node,name,bid_mw,price_per_mw,allocated_mw\n";
  for (std::size_t m = 0; m < r.allocation.size(); ++m) {
    for (std::size_t k = 0; k < r.allocation[m].size(); ++k) {
      if (!(r.bid[m][k] > 0.0)) continue;
      const int node = static_cast<int>(k + 1);
      out << r.aggregator_ids[m] << ',' << node << ',' << s.feeder.name(node) << ',' << format12(mw(s, r.bid[m][k]))
          << ',' << format12(r.price[m][k]) << ',' << format12(mw(s, r.allocation[m][k])) << '\n';
    }
  }
  return out.str();
}

std::string audit_json(const MarketScenario& s, const BoxAuditReport& a, std::size_t samples, std::uint64_t seed) {
  ordered_json violations = ordered_json::array();
  auto add = [&](const Violation& v) {
    violations.push_back({{"kind", to_string(v.kind)},
                          {"node", v.node},
                          {"value", num(v.value)},
                          {"bound", num(v.bound)}});
  };
  for (const auto& v : a.worst.voltage) add(v);
  for (const auto& v : a.worst.current) add(v);
  ordered_json dispatch = ordered_json::array();
  for (double d : a.worst_dispatch) dispatch.push_back(num(mw(s, d)));
  ordered_json j{{"samples_requested", samples},
                 {"seed", seed},
                 {"samples", a.samples},
                 {"corners", a.corners},
                 {"evaluated", a.samples + a.corners},
                 {"violating", a.violating_samples},
                 {"nonconverged", a.nonconverged},
                 {"worst_violation", num(a.worst_violation)},
                 {"tolerance", 1e-4},
                 {"clean", a.clean()},
                 {"worst_dispatch_mw", dispatch},
                 {"worst_violations", violations}};
  return dump(j);
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "p_max_mw,method,status,injection_mw,claimed_max_v_pu,true_max_v_pu,v_limit_pu,violates\n";
  for (const auto& r : rows) {
    const bool ok = r.status == "optimal";
    out << format12(r.p_max_mw) << ',' << r.method << ',' << r.status << ',';
    if (ok) {
      out << format12(r.injection_mw) << ',' << format12(r.claimed_max_voltage) << ','
          << format12(r.true_max_voltage) << ',' << format12(r.v_max) << ','
          << (r.true_max_voltage > r.v_max + 1e-9 ? 1 : 0);
    } else {
      out << ",,," << format12(r.v_max) << ',';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace gridmarket
