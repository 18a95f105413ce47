#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridmarket/feeder.hpp"

namespace gridmarket {

/// Solution of the branch-flow equations. Vectors are indexed by node / by
/// the branch feeding that node (0-based, node k + 1).
struct PowerFlowSolution {
  std::vector<double> V;  // squared voltage magnitude, p.u.^2
  std::vector<double> l;  // squared current magnitude, p.u.^2
  std::vector<double> P;  // active flow toward the substation, p.u.
  std::vector<double> Q;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  std::string diagnostic;

  double max_voltage() const;
  double min_voltage() const;
};

struct SweepOptions {
  double tolerance = 1e-10;  // on max |dv| between sweeps
  int max_iterations = 200;
};

/// Thrown when the sweep fails to reach a fixed point (e.g. past the
/// voltage-collapse point).
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Backward/forward sweep on the exact DistFlow equations for net nodal
/// injections p, q (p.u.). Never throws on non-convergence; check
/// `converged`.
PowerFlowSolution solve_distflow(const FeederModel& feeder, const std::vector<double>& p,
                                 const std::vector<double>& q, const SweepOptions& options = {});

/// Largest absolute residual of the four DistFlow equation families.
double distflow_residual(const FeederModel& feeder, const std::vector<double>& p, const std::vector<double>& q,
                         const PowerFlowSolution& s);

/// High-voltage root of v1^2 - (v0 + 2rp + 2xq) v1 + |z|^2 (p^2 + q^2) = 0.
/// Throws std::domain_error when the discriminant is negative.
double solve_two_node_exact(double r, double x, double p, double q, double v0);

/// Loss-free linearization: V = v0 1 + Mp p + Mq q, P = C p, Q = C q, l = 0.
PowerFlowSolution solve_lindist(const FeederModel& feeder, const std::vector<double>& p,
                                const std::vector<double>& q);

struct Violation {
  enum class Kind { voltage_low, voltage_high, current_high };
  Kind kind;
  int node = 0;  // node, or child node of the branch for current entries
  double value = 0.0;
  double bound = 0.0;
};

std::string to_string(Violation::Kind kind);

struct ViolationReport {
  std::vector<Violation> voltage;
  std::vector<Violation> current;
  /// Largest excess beyond a tolerance-widened limit; <= 0 means clean.
  double worst_violation = -std::numeric_limits<double>::infinity();
  bool converged = true;
  std::string diagnostic;

  bool clean() const { return voltage.empty() && current.empty() && converged; }
};

struct AdmissibilityTolerance {
  double voltage = 1e-4;
  double current = 1e-4;
};

/// Solves exact DistFlow and lists every limit violation beyond `tol`.
/// Non-convergence is reported as inadmissible with a diagnostic.
ViolationReport check_admissible(const FeederModel& feeder, const std::vector<double>& p,
                                 const std::vector<double>& q, const AdmissibilityTolerance& tol = {});

struct BoxAuditReport {
  std::size_t samples = 0;
  std::size_t corners = 0;
  std::size_t violating_samples = 0;
  std::size_t nonconverged = 0;
  double worst_violation = -std::numeric_limits<double>::infinity();
  ViolationReport worst;             // report of the worst sample
  std::vector<double> worst_dispatch;  // flexible injection p_g at the worst sample

  bool clean() const { return violating_samples == 0 && nonconverged == 0; }
};

/// Extreme corners of the box, at most `max_corners`: all-upper, all-lower,
/// then single-coordinate flips of each, then the remaining corners in
/// binary order. Only nodes with positive width count as dimensions.
std::vector<std::vector<double>> box_corners(const std::vector<double>& lower, const std::vector<double>& upper,
                                             std::size_t max_corners = 64);

/// Evaluates exact admissibility at the box corners plus `samples` uniform
/// draws from the box [lower, upper] of flexible injection p_g. Net
/// injection is p_g - P_L, reactive injection is -Q_L.
BoxAuditReport sample_box_admissibility(const FeederModel& feeder, const DemandProfile& demand,
                                        const std::vector<double>& lower, const std::vector<double>& upper,
                                        std::size_t samples, std::uint64_t seed,
                                        const AdmissibilityTolerance& tol = {});

enum class SocpCapMode { total, per_node };

struct SocpRelaxationResult {
  bool solved = false;
  std::string status;
  std::vector<double> injection;  // flexible injection p_g per node, p.u.
  double total_injection = 0.0;
  PowerFlowSolution relaxed;       // the relaxation's own (V, l, P, Q)
  double claimed_max_voltage = 0.0;  // max V in the relaxation
  PowerFlowSolution exact;         // exact DistFlow at the same injections
  double true_max_voltage = 0.0;
  double max_cone_gap = 0.0;       // max over branches of l v - (P^2 + Q^2)
};

/// max sum p_g s.t. branch-flow model with l v >= P^2 + Q^2, voltage and
/// current limits, p_g >= 0 at `injection_nodes` (all nodes when empty) and
/// the injection cap.
SocpRelaxationResult solve_socp_relaxation(const FeederModel& feeder, const DemandProfile& demand, double p_max,
                                           SocpCapMode mode = SocpCapMode::total,
                                           const std::vector<int>& injection_nodes = {});

}  // namespace gridmarket
