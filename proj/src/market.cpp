#include "gridmarket/market.hpp"

#include <algorithm>
#include <cmath>

#include "gridmarket/network_matrices.hpp"

namespace gridmarket {

using opt::AffineExpr;

std::string to_string(PriceRule rule) { return rule == PriceRule::marginal ? "marginal" : "min-allocated"; }

PriceRule price_rule_from_string(const std::string& text) {
  if (text == "min-allocated" || text == "min_allocated") return PriceRule::min_allocated;
  if (text == "marginal") return PriceRule::marginal;
  throw InputError("unknown price rule '" + text + "' (expected min-allocated or marginal)");
}

double AllocationResult::allocation_mw(std::size_t m, int node) const {
  return pu_to_mw(allocation[m][static_cast<std::size_t>(node - 1)], base_mva);
}

double AllocationResult::node_total(int node) const {
  double s = 0.0;
  for (const auto& row : allocation) s += row[static_cast<std::size_t>(node - 1)];
  return s;
}

double AllocationResult::total() const {
  double s = 0.0;
  for (const auto& row : allocation)
    for (double a : row) s += a;
  return s;
}

namespace {

// Interior-point answers sit a hair inside their bounds; values within
// kSnapPu of a bound are reported on it.
constexpr double kSnapPu = 1e-9;

double snap(double value, double cap) {
  value = std::clamp(value, 0.0, cap);
  if (value < kSnapPu) return 0.0;
  if (cap - value < kSnapPu) return cap;
  return value;
}

struct MarketProgram {
  opt::ConvexProgram program;
  CiaVariables vars;
  opt::VarBlock slack;
  // index[m][k] of the allocation variable, or npos when nothing is offered.
  std::vector<std::vector<std::size_t>> alloc;
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

double offered_total(const MarketScenario& s, int node) {
  double total = 0.0;
  for (std::size_t m = 0; m < s.bids.size(); ++m) total += s.capacity(m, node);
  return total;
}

// Adds the inner approximation around the zero-flexibility operating point
// with `flex[k]` the flexible magnitude at node k + 1.
void add_network(MarketProgram& mp, const MarketScenario& s, const std::vector<AffineExpr>& flex,
                 const MarketOptions& options) {
  const auto& feeder = s.feeder;
  const auto& demand = s.demand;
  const std::size_t n = feeder.node_count;
  const auto matrices = build_matrices(feeder);
  const auto op = compute_operating_point(feeder, demand);

  CiaInjections in;
  for (std::size_t k = 0; k < n; ++k) {
    AffineExpr base(-demand.p_load[k]);
    if (s.direction == Direction::upper) {
      in.p_high.push_back(base + flex[k] + AffineExpr(s.robust ? demand.d_plus[k] : 0.0));
      in.p_low.push_back(base);
    } else {
      in.p_high.push_back(base);
      in.p_low.push_back(base - flex[k] - AffineExpr(s.robust ? demand.d_minus[k] : 0.0));
    }
    in.q.emplace_back(-demand.q_load[k]);
  }
  mp.vars = add_cia_variables(mp.program, n);
  build_cia_constraints(matrices, op, in, mp.vars, feeder.v0, options.clamp_lower_bound).add_to(mp.program);
  add_network_limits(mp.program, feeder, mp.vars);
}

MarketProgram make_step1(const MarketScenario& s, const MarketOptions& options) {
  s.validate();
  const std::size_t n = s.feeder.node_count;
  MarketProgram mp;
  mp.slack = mp.program.add_variable("s", n, 0.0);
  std::vector<AffineExpr> flex(n);
  AffineExpr objective;
  for (std::size_t k = 0; k < n; ++k) {
    const double total = offered_total(s, static_cast<int>(k + 1));
    // s <= offered keeps the curtailed magnitude nonnegative.
    mp.program.add_affine_ineq(AffineExpr::variable(mp.slack[k]), total, "s_max");
    flex[k] = AffineExpr(total) - AffineExpr::variable(mp.slack[k]);
    objective.add(mp.slack[k], 1.0);
  }
  add_network(mp, s, flex, options);
  mp.program.set_objective(objective, opt::Sense::minimize);
  return mp;
}

MarketProgram make_step2(const MarketScenario& s, const MarketOptions& options) {
  s.validate();
  const std::size_t n = s.feeder.node_count;
  MarketProgram mp;
  double k_max = 0.0;
  for (std::size_t m = 0; m < s.bids.size(); ++m)
    for (std::size_t k = 0; k < n; ++k)
      if (s.capacity(m, static_cast<int>(k + 1)) > 0.0) k_max = std::max(k_max, s.bids[m].k[k]);
  const double scale = k_max > 0.0 ? 1.0 / k_max : 1.0;

  std::vector<AffineExpr> flex(n);
  AffineExpr objective;
  mp.alloc.assign(s.bids.size(), std::vector<std::size_t>(n, kNone));
  for (std::size_t m = 0; m < s.bids.size(); ++m) {
    for (std::size_t k = 0; k < n; ++k) {
      const double cap = s.capacity(m, static_cast<int>(k + 1));
      if (!(cap > 0.0)) continue;
      auto block = mp.program.add_variable("a_" + s.bids[m].aggregator_id + "_" + std::to_string(k + 1), 1, 0.0, cap);
      mp.alloc[m][k] = block[0];
      flex[k].add(block[0], 1.0);
      objective.add(block[0], k_max > 0.0 ? s.bids[m].k[k] * scale : 1.0);
    }
  }
  add_network(mp, s, flex, options);
  mp.program.set_objective(objective, opt::Sense::maximize);
  return mp;
}

// True when the box of zero flexibility already fails the certified limits.
bool background_infeasible(const MarketScenario& s, const MarketOptions& options, const opt::ConicBackend& backend) {
  MarketProgram mp;
  add_network(mp, s, std::vector<AffineExpr>(s.feeder.node_count), options);
  return opt::solve(mp.program, backend).status == opt::Status::infeasible;
}

[[noreturn]] void fail(const std::string& step, const opt::Solution& sol, const MarketScenario& s,
                       const MarketOptions& options, const opt::ConicBackend& backend) {
  std::string message = step + ": solver returned " + opt::to_string(sol.status);
  if (sol.status == opt::Status::infeasible) {
    message += background_infeasible(s, options, backend)
                   ? " (background demand alone violates the certified network limits)"
                   : " (zero flexibility is admissible, so this indicates an internal inconsistency)";
  }
  throw SolverError(message, sol.status);
}

}  // namespace

opt::ConvexProgram build_step1_program(const MarketScenario& scenario, const MarketOptions& options) {
  return make_step1(scenario, options).program;
}

opt::ConvexProgram build_step2_program(const MarketScenario& scenario, const MarketOptions& options) {
  return make_step2(scenario, options).program;
}

FeasibilityResult step1_feasibility(const MarketScenario& scenario, const MarketOptions& options) {
  auto mp = make_step1(scenario, options);
  auto backend = opt::make_backend(options.backend);
  auto sol = opt::solve(mp.program, *backend);
  if (!sol.optimal()) fail("step 1", sol, scenario, options, *backend);

  FeasibilityResult r;
  r.direction = scenario.direction;
  r.robust = scenario.robust;
  r.base_mva = scenario.feeder.base_mva;
  r.epsilon = scenario.epsilon_pu();
  r.slack = sol.value(mp.slack);
  for (double& v : r.slack) v = v < kSnapPu ? 0.0 : v;
  r.max_slack = r.slack.empty() ? 0.0 : *std::max_element(r.slack.begin(), r.slack.end());
  r.feasible = r.max_slack <= r.epsilon;
  r.stats = sol.stats;
  return r;
}

namespace {

AllocationResult empty_result(const MarketScenario& s) {
  const std::size_t n = s.feeder.node_count;
  AllocationResult r;
  r.direction = s.direction;
  r.robust = s.robust;
  r.base_mva = s.feeder.base_mva;
  for (std::size_t m = 0; m < s.bids.size(); ++m) {
    r.aggregator_ids.push_back(s.bids[m].aggregator_id);
    std::vector<double> bid(n);
    for (std::size_t k = 0; k < n; ++k) bid[k] = s.capacity(m, static_cast<int>(k + 1));
    r.bid.push_back(bid);
    r.price.push_back(s.bids[m].k);
    r.allocation.emplace_back(n, 0.0);
  }
  return r;
}

}  // namespace

AllocationResult step2_allocate(const MarketScenario& scenario, const MarketOptions& options) {
  auto mp = make_step2(scenario, options);
  auto backend = opt::make_backend(options.backend);
  auto sol = opt::solve(mp.program, *backend);
  if (!sol.optimal()) fail("step 2", sol, scenario, options, *backend);

  AllocationResult r = empty_result(scenario);
  for (std::size_t m = 0; m < mp.alloc.size(); ++m)
    for (std::size_t k = 0; k < mp.alloc[m].size(); ++k)
      if (mp.alloc[m][k] != kNone) r.allocation[m][k] = snap(sol.value(mp.alloc[m][k]), r.bid[m][k]);
  r.stats = sol.stats;
  finalize_allocation(r, options.price_rule);
  return r;
}

AllocationResult accept_all(const MarketScenario& scenario, PriceRule rule) {
  AllocationResult r = empty_result(scenario);
  r.allocation = r.bid;
  finalize_allocation(r, rule);
  return r;
}

std::vector<std::optional<double>> clearing_prices(const AllocationResult& r, PriceRule rule) {
  const std::size_t n = r.allocation.empty() ? 0 : r.allocation.front().size();
  std::vector<std::optional<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::optional<double> lowest_allocated;
    std::optional<double> lowest_offered;
    for (std::size_t m = 0; m < r.allocation.size(); ++m) {
      const double k_m = r.price[m][k];
      if (pu_to_mw(r.bid[m][k], r.base_mva) > kPriceEligibilityMw)
        lowest_offered = lowest_offered ? std::min(*lowest_offered, k_m) : k_m;
      if (pu_to_mw(r.allocation[m][k], r.base_mva) > kPriceEligibilityMw)
        lowest_allocated = lowest_allocated ? std::min(*lowest_allocated, k_m) : k_m;
    }
    if (!lowest_allocated) continue;
    out[k] = rule == PriceRule::marginal ? lowest_offered : lowest_allocated;
  }
  return out;
}

double dno_revenue(const AllocationResult& r, const std::vector<std::optional<double>>& prices) {
  double total = 0.0;
  for (std::size_t k = 0; k < prices.size(); ++k) {
    if (!prices[k]) continue;
    for (std::size_t m = 0; m < r.allocation.size(); ++m) total += *prices[k] * pu_to_mw(r.allocation[m][k], r.base_mva);
  }
  return total;
}

void finalize_allocation(AllocationResult& r, PriceRule rule) {
  const std::size_t n = r.allocation.empty() ? 0 : r.allocation.front().size();
  r.clearing_price = clearing_prices(r, rule);
  r.revenue = dno_revenue(r, r.clearing_price);

  r.objective = 0.0;
  for (std::size_t m = 0; m < r.allocation.size(); ++m)
    for (std::size_t k = 0; k < n; ++k) r.objective += r.price[m][k] * pu_to_mw(r.allocation[m][k], r.base_mva);

  r.nodal_fraction.assign(n, std::nullopt);
  for (std::size_t k = 0; k < n; ++k) {
    double a = 0.0, b = 0.0;
    for (std::size_t m = 0; m < r.allocation.size(); ++m) {
      a += r.allocation[m][k];
      b += r.bid[m][k];
    }
    if (b > 0.0) r.nodal_fraction[k] = a / b;
  }
  r.aggregator_fraction.assign(r.allocation.size(), std::nullopt);
  for (std::size_t m = 0; m < r.allocation.size(); ++m) {
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      a += r.allocation[m][k];
      b += r.bid[m][k];
    }
    if (b > 0.0) r.aggregator_fraction[m] = a / b;
  }

  r.tie_nodes.clear();
  auto mw = [&](double pu) { return pu_to_mw(pu, r.base_mva); };
  for (std::size_t k = 0; k < n; ++k) {
    bool tie = false;
    for (std::size_t m1 = 0; m1 < r.allocation.size() && !tie; ++m1) {
      for (std::size_t m2 = m1 + 1; m2 < r.allocation.size() && !tie; ++m2) {
        if (mw(r.bid[m1][k]) <= kPriceEligibilityMw || mw(r.bid[m2][k]) <= kPriceEligibilityMw) continue;
        const double k1 = r.price[m1][k], k2 = r.price[m2][k];
        if (std::abs(k1 - k2) > 1e-9 * std::max({1.0, std::abs(k1), std::abs(k2)})) continue;
        const bool curtailed = mw(r.bid[m1][k] - r.allocation[m1][k]) > kPriceEligibilityMw ||
                               mw(r.bid[m2][k] - r.allocation[m2][k]) > kPriceEligibilityMw;
        const bool shared = mw(r.allocation[m1][k] + r.allocation[m2][k]) > kPriceEligibilityMw;
        tie = curtailed && shared;
      }
    }
    if (tie) r.tie_nodes.push_back(static_cast<int>(k + 1));
  }
}

namespace {

AuditBox make_box(const MarketScenario& s, const std::vector<double>& magnitude) {
  const std::size_t n = s.feeder.node_count;
  AuditBox box{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t k = 0; k < n; ++k) {
    if (s.direction == Direction::upper)
      box.upper[k] = magnitude[k] + (s.robust ? s.demand.d_plus[k] : 0.0);
    else
      box.lower[k] = -magnitude[k] - (s.robust ? s.demand.d_minus[k] : 0.0);
  }
  return box;
}

}  // namespace

AuditBox allocation_box(const MarketScenario& scenario, const AllocationResult& result) {
  std::vector<double> total(scenario.feeder.node_count, 0.0);
  for (std::size_t k = 0; k < total.size(); ++k) total[k] = result.node_total(static_cast<int>(k + 1));
  return make_box(scenario, total);
}

AuditBox bid_box(const MarketScenario& scenario) {
  std::vector<double> total(scenario.feeder.node_count, 0.0);
  for (std::size_t k = 0; k < total.size(); ++k) total[k] = offered_total(scenario, static_cast<int>(k + 1));
  return make_box(scenario, total);
}

BoxAuditReport audit_allocation(const MarketScenario& scenario, const AllocationResult& result,
                                std::size_t samples, std::uint64_t seed) {
  auto box = allocation_box(scenario, result);
  return sample_box_admissibility(scenario.feeder, scenario.demand, box.lower, box.upper, samples, seed);
}

MarketOutcome run_market(const MarketScenario& scenario, const MarketOptions& options) {
  MarketOutcome out;
  out.feasibility = step1_feasibility(scenario, options);
  if (!out.feasibility.feasible) out.cleared = step2_allocate(scenario, options);
  return out;
}

}  // namespace gridmarket
