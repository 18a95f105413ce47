#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "gridmarket/convex_program.hpp"
#include "gridmarket/distflow.hpp"
#include "gridmarket/feeder.hpp"
#include "gridmarket/network_matrices.hpp"

namespace gridmarket {

/// Linearization point (P0, Q0, v0_j) of one branch; v is the receiving-end
/// squared voltage.
struct BranchPoint {
  double P0 = 0.0;
  double Q0 = 0.0;
  double v0 = 1.0;

  /// l = (P^2 + Q^2) / v at the point.
  double current() const;
  /// Gradient of l with respect to (P, Q, v).
  Eigen::Vector3d jacobian() const;
  /// Hessian of l with respect to (P, Q, v); PSD for v > 0.
  Eigen::Matrix3d hessian() const;
};

/// Second-order data of l = (P^2 + Q^2) / v for one branch.
struct BranchTaylor {
  BranchPoint point;
  double l0 = 0.0;
  Eigen::Vector3d J = Eigen::Vector3d::Zero();
  Eigen::Vector3d J_plus = Eigen::Vector3d::Zero();
  Eigen::Vector3d J_minus = Eigen::Vector3d::Zero();
  Eigen::Matrix3d He = Eigen::Matrix3d::Zero();
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();  // ascending, before clipping
  /// F with F^T F = He (rows sqrt(lambda_k) u_k^T, clipped eigenvalues).
  Eigen::Matrix3d factor = Eigen::Matrix3d::Zero();
};

BranchTaylor make_branch_taylor(const BranchPoint& point);

struct OperatingPoint {
  std::vector<BranchTaylor> branches;  // branch k feeds node k + 1
  PowerFlowSolution flow;
};

/// Exact power flow at zero flexibility (p = -P_L, q = -Q_L) and the Taylor
/// data of every branch there. Throws ConvergenceError.
OperatingPoint compute_operating_point(const FeederModel& feeder, const DemandProfile& demand);
OperatingPoint operating_point_from_flow(const PowerFlowSolution& flow);

/// l0 + J'delta + 0.5 delta' He delta.
double taylor_current(const BranchPoint& point, const Eigen::Vector3d& delta);

/// All 8 vectors choosing each coordinate from delta_plus or delta_minus;
/// bit k of the index selects delta_minus for coordinate k.
std::array<Eigen::Vector3d, 8> corner_deltas(const Eigen::Vector3d& delta_plus, const Eigen::Vector3d& delta_minus);

/// max over the eight corners of delta' He delta.
double corner_psi(const Eigen::Matrix3d& He, const Eigen::Vector3d& delta_plus, const Eigen::Vector3d& delta_minus);

/// Decision handles of the inner approximation; each block has N entries.
struct CiaVariables {
  opt::VarBlock l_lb, l_ub, t;
  opt::VarBlock P_plus, P_minus, Q_plus, Q_minus, V_plus, V_minus;
};

CiaVariables add_cia_variables(opt::ConvexProgram& program, std::size_t node_count);

/// Net nodal injections that span the certified box: the upper bounds of
/// P, V use `p_high`, the lower bounds use `p_low`. Passing the same
/// expressions for both gives the single-point form.
struct CiaInjections {
  std::vector<opt::AffineExpr> p_high;
  std::vector<opt::AffineExpr> p_low;
  std::vector<opt::AffineExpr> q;
};

/// Constraint rows realizing the inner approximation, ready to be added to a
/// program that already holds the CiaVariables.
struct CiaBoundSystem {
  std::vector<opt::AffineRow> bound_definitions;  // 6N: P+-, Q+-, V+- (== 0)
  std::vector<opt::AffineRow> lower_bound_equalities;  // N: l_lb (== 0)
  std::vector<opt::AffineRow> lower_bound_clamps;  // N when clamped: -l_lb <= 0
  std::vector<opt::AffineRow> epigraph_linear;  // 4N: t >= +-2 (J pairing)
  std::vector<opt::QuadConstraint> epigraph_quadratic;  // 8N: t >= corner' He corner
  std::vector<opt::AffineRow> upper_links;  // N: l0 + t - l_ub <= 0

  void add_to(opt::ConvexProgram& program) const;
};

/// `clamp_lower_bound` adds -l_lb <= 0 rows; with the l_lb equality they
/// forbid flow reversal past roughly half the operating-point flow.
CiaBoundSystem build_cia_constraints(const NetworkMatrices& matrices, const OperatingPoint& op,
                                     const CiaInjections& injections, const CiaVariables& vars, double v0,
                                     bool clamp_lower_bound = false);

/// Adds v_min <= V-, V+ <= v_max and l_ub <= l_max.
void add_network_limits(opt::ConvexProgram& program, const FeederModel& feeder, const CiaVariables& vars);

/// Per-branch l0, J and eigenvalues of He as CSV.
void dump_operating_point_csv(const OperatingPoint& op, const std::filesystem::path& path);

}  // namespace gridmarket
