#pragma once

#include <string>
#include <vector>

#include "gridmarket/distflow.hpp"
#include "gridmarket/feeder.hpp"
#include "gridmarket/report.hpp"

namespace gridmarket {

enum class InjectionSense { raise, lower };

/// Largest total flexible injection one model admits, with the model's own
/// voltage claim and the exact power flow at the same injections.
struct InjectionLimit {
  std::string status;  // "optimal" or the solver status
  std::vector<double> injection;  // p_g per node, p.u.; negative when lowering
  double total = 0.0;             // sum of p_g
  double claimed_max_v = 0.0;     // squared voltage, p.u.^2
  double claimed_min_v = 0.0;
  PowerFlowSolution exact;

  bool solved() const { return status == "optimal"; }
};

/// Loss-free linear model with voltage limits and |sum p_g| <= cap.
InjectionLimit lindist_limit(const FeederModel& feeder, const DemandProfile& demand, double cap,
                             const std::vector<int>& nodes, InjectionSense sense = InjectionSense::raise);

/// Inner approximation certifying the whole box between zero and p_g.
InjectionLimit cia_limit(const FeederModel& feeder, const DemandProfile& demand, double cap,
                         const std::vector<int>& nodes, InjectionSense sense = InjectionSense::raise);

/// Cone relaxation of the branch-flow model (raise only).
InjectionLimit socp_limit(const FeederModel& feeder, const DemandProfile& demand, double cap,
                          const std::vector<int>& nodes);

/// Exact limit at a single node by grid search: the last grid point p such
/// that every grid point between 0 and p is admissible. Grid points are
/// multiples of `step` up to `bound` (negative multiples when lowering).
double exact_limit_grid(const FeederModel& feeder, const DemandProfile& demand, int node, double step,
                        double bound, InjectionSense sense = InjectionSense::raise);

/// Sweep of the total injection cap. For each cap, every model reports the
/// injection it admits and the exact voltage there; "exact" spreads the cap
/// evenly over `nodes` and reports the true voltage.
std::vector<CompareRow> compare_methods(const FeederModel& feeder, const DemandProfile& demand,
                                        const std::vector<double>& caps_mw, const std::vector<int>& nodes);

}  // namespace gridmarket
