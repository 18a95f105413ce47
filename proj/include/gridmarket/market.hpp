#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridmarket/cia.hpp"
#include "gridmarket/convex_program.hpp"
#include "gridmarket/distflow.hpp"
#include "gridmarket/feeder.hpp"

namespace gridmarket {

/// A market program could not be solved, or gave an answer that must be
/// impossible (for example an infeasible allocation step).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& message, opt::Status status) : std::runtime_error(message), status_(status) {}
  opt::Status status() const { return status_; }

 private:
  opt::Status status_;
};

/// Allocations below this many MW do not count when setting a price.
inline constexpr double kPriceEligibilityMw = 1e-6;

enum class PriceRule {
  min_allocated,  // lowest price among aggregators holding a positive allocation
  marginal,       // lowest offered price at the node once any offer there is curtailed
};

std::string to_string(PriceRule rule);
PriceRule price_rule_from_string(const std::string& text);

struct MarketOptions {
  PriceRule price_rule = PriceRule::min_allocated;
  bool clamp_lower_bound = false;  // see build_cia_constraints
  std::string backend;             // empty: GRIDMARKET_SOLVER or ecos
};

struct FeasibilityResult {
  Direction direction = Direction::upper;
  bool robust = false;
  std::vector<double> slack;  // per node, p.u.
  double max_slack = 0.0;     // p.u.
  double epsilon = 0.0;       // p.u.
  bool feasible = false;
  double base_mva = 1.0;
  opt::SolveStats stats;

  double max_slack_mw() const { return pu_to_mw(max_slack, base_mva); }
};

struct AllocationResult {
  Direction direction = Direction::upper;
  bool robust = false;
  double base_mva = 1.0;
  std::vector<std::string> aggregator_ids;
  /// allocation[m][node - 1], p.u., magnitude of the cleared range.
  std::vector<std::vector<double>> allocation;
  /// bid[m][node - 1], p.u., the offers the allocation was cleared against.
  std::vector<std::vector<double>> bid;
  std::vector<std::vector<double>> price;  // $/MW, same layout
  std::vector<std::optional<double>> clearing_price;  // per node, $/MW
  double revenue = 0.0;                                // $
  std::vector<std::optional<double>> nodal_fraction;   // allocated / offered per node
  std::vector<std::optional<double>> aggregator_fraction;
  /// Nodes where an equal-price tie leaves the split between aggregators open.
  std::vector<int> tie_nodes;
  double objective = 0.0;  // sum k p, $
  opt::SolveStats stats;

  double allocation_mw(std::size_t m, int node) const;
  double node_total(int node) const;  // p.u.
  double total() const;               // p.u.
};

/// (P1): minimum total curtailment making the whole bid box admissible.
FeasibilityResult step1_feasibility(const MarketScenario& scenario, const MarketOptions& options = {});

/// (P2): price-weighted maximum admissible allocation, with prices,
/// revenue and fractions filled in.
AllocationResult step2_allocate(const MarketScenario& scenario, const MarketOptions& options = {});

/// Per-node clearing price for `result` under `rule`.
std::vector<std::optional<double>> clearing_prices(const AllocationResult& result,
                                                   PriceRule rule = PriceRule::min_allocated);

/// sum_i sum_m k_c,i p_m,i in dollars; absent prices contribute nothing.
double dno_revenue(const AllocationResult& result, const std::vector<std::optional<double>>& prices);

/// Fills clearing prices, revenue, fractions and tie flags from the
/// allocation, bid and price tables.
void finalize_allocation(AllocationResult& result, PriceRule rule = PriceRule::min_allocated);

/// Bounds of the flexible injection p_g per node certified by an
/// allocation, at nominal demand. Robust runs widen the box by the
/// uncertainty on the side that matters for the direction.
struct AuditBox {
  std::vector<double> lower;
  std::vector<double> upper;
};

AuditBox allocation_box(const MarketScenario& scenario, const AllocationResult& result);
/// Same for accepting every bid in full.
AuditBox bid_box(const MarketScenario& scenario);

BoxAuditReport audit_allocation(const MarketScenario& scenario, const AllocationResult& result,
                                std::size_t samples, std::uint64_t seed);

struct MarketOutcome {
  FeasibilityResult feasibility;
  std::optional<AllocationResult> cleared;  // empty when every bid was accepted

  bool accepted_all() const { return !cleared.has_value(); }
};

/// Step 1, then step 2 only when the slack exceeds epsilon.
MarketOutcome run_market(const MarketScenario& scenario, const MarketOptions& options = {});

/// Allocation result equal to the full bids (the accepted-all branch).
AllocationResult accept_all(const MarketScenario& scenario, PriceRule rule = PriceRule::min_allocated);

/// The program behind step 1 or step 2, for export.
opt::ConvexProgram build_step1_program(const MarketScenario& scenario, const MarketOptions& options = {});
opt::ConvexProgram build_step2_program(const MarketScenario& scenario, const MarketOptions& options = {});

}  // namespace gridmarket
