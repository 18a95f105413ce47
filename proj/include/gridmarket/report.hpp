#pragma once

#include <string>
#include <vector>

#include "gridmarket/distflow.hpp"
#include "gridmarket/feeder.hpp"
#include "gridmarket/market.hpp"

namespace gridmarket {

/// Value rounded to 12 significant digits, the precision of every report.
double round12(double value);
/// "%.12g" text of a value.
std::string format12(double value);

// Report documents. Powers are in MW, prices in $/MW, money in $.
std::string feasibility_json(const MarketScenario& scenario, const FeasibilityResult& result);
std::string allocation_json(const MarketScenario& scenario, const AllocationResult& result, bool accepted_all);
/// node,name,clearing_price_per_mw,allocated_mw,offered_mw,nodal_fraction
std::string prices_csv(const MarketScenario& scenario, const AllocationResult& result);
/// aggregator,node,name,bid_mw,price_per_mw,allocated_mw
std::string allocation_csv(const MarketScenario& scenario, const AllocationResult& result);
std::string audit_json(const MarketScenario& scenario, const BoxAuditReport& report, std::size_t samples,
                       std::uint64_t seed);

/// One row of the approximation comparison sweep.
struct CompareRow {
  std::string method;  // lindist, socp, cia, exact
  double p_max_mw = 0.0;
  std::string status;
  double injection_mw = 0.0;        // total injection the method admits
  double claimed_max_voltage = 0.0;  // |V| p.u. according to the method
  double true_max_voltage = 0.0;     // |V| p.u. from exact power flow at that injection
  double v_max = 0.0;                // |V| p.u. limit
};

/// p_max_mw,method,status,injection_mw,claimed_max_v_pu,true_max_v_pu,v_limit_pu,violates
std::string compare_csv(const std::vector<CompareRow>& rows);

}  // namespace gridmarket
