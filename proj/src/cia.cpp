#include "gridmarket/cia.hpp"

#include <fstream>
#include <iomanip>

namespace gridmarket {

using opt::AffineExpr;

double BranchPoint::current() const { return (P0 * P0 + Q0 * Q0) / v0; }

Eigen::Vector3d BranchPoint::jacobian() const {
  return {2.0 * P0 / v0, 2.0 * Q0 / v0, -(P0 * P0 + Q0 * Q0) / (v0 * v0)};
}

Eigen::Matrix3d BranchPoint::hessian() const {
  const double v2 = v0 * v0;
  const double v3 = v2 * v0;
  Eigen::Matrix3d h;
  h << 2.0 / v0, 0.0, -2.0 * P0 / v2,
       0.0, 2.0 / v0, -2.0 * Q0 / v2,
       -2.0 * P0 / v2, -2.0 * Q0 / v2, 2.0 * (P0 * P0 + Q0 * Q0) / v3;
  return h;
}

BranchTaylor make_branch_taylor(const BranchPoint& point) {
  if (!(point.v0 > 0.0)) throw std::domain_error("operating point needs positive receiving-end voltage");
  BranchTaylor t;
  t.point = point;
  t.l0 = point.current();
  t.J = point.jacobian();
  t.J_plus = t.J.cwiseMax(0.0);
  t.J_minus = t.J.cwiseMin(0.0);
  t.He = point.hessian();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(t.He);
  t.eigenvalues = eig.eigenvalues();
  if (t.eigenvalues.minCoeff() < -1e-10 * std::max(1.0, t.eigenvalues.cwiseAbs().maxCoeff()))
    throw std::logic_error("branch Hessian is not positive semidefinite");
  const Eigen::Vector3d clipped = t.eigenvalues.cwiseMax(0.0);
  t.factor = clipped.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  return t;
}

OperatingPoint operating_point_from_flow(const PowerFlowSolution& flow) {
  OperatingPoint op;
  op.flow = flow;
  op.branches.reserve(flow.V.size());
  for (std::size_t k = 0; k < flow.V.size(); ++k) op.branches.push_back(make_branch_taylor({flow.P[k], flow.Q[k], flow.V[k]}));
  return op;
}

OperatingPoint compute_operating_point(const FeederModel& feeder, const DemandProfile& demand) {
  const std::size_t n = feeder.node_count;
  std::vector<double> p(n), q(n);
  for (std::size_t k = 0; k < n; ++k) {
    p[k] = -demand.p_load[k];
    q[k] = -demand.q_load[k];
  }
  auto flow = solve_distflow(feeder, p, q);
  if (!flow.converged) throw ConvergenceError("operating point: background demand has no power-flow solution (" +
                                              flow.diagnostic + ")");
  return operating_point_from_flow(flow);
}

double taylor_current(const BranchPoint& point, const Eigen::Vector3d& delta) {
  return point.current() + point.jacobian().dot(delta) + 0.5 * delta.dot(point.hessian() * delta);
}

std::array<Eigen::Vector3d, 8> corner_deltas(const Eigen::Vector3d& delta_plus, const Eigen::Vector3d& delta_minus) {
  std::array<Eigen::Vector3d, 8> out;
  for (unsigned mask = 0; mask < 8; ++mask) {
    for (int k = 0; k < 3; ++k) out[mask](k) = ((mask >> k) & 1U) ? delta_minus(k) : delta_plus(k);
  }
  return out;
}

double corner_psi(const Eigen::Matrix3d& He, const Eigen::Vector3d& delta_plus, const Eigen::Vector3d& delta_minus) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& d : corner_deltas(delta_plus, delta_minus)) best = std::max(best, d.dot(He * d));
  return best;
}

CiaVariables add_cia_variables(opt::ConvexProgram& program, std::size_t node_count) {
  CiaVariables v;
  v.l_lb = program.add_variable("l_lb", node_count);
  v.l_ub = program.add_variable("l_ub", node_count);
  v.t = program.add_variable("t", node_count);
  v.P_plus = program.add_variable("P_plus", node_count);
  v.P_minus = program.add_variable("P_minus", node_count);
  v.Q_plus = program.add_variable("Q_plus", node_count);
  v.Q_minus = program.add_variable("Q_minus", node_count);
  v.V_plus = program.add_variable("V_plus", node_count);
  v.V_minus = program.add_variable("V_minus", node_count);
  return v;
}

namespace {

AffineExpr var(std::size_t i, double c = 1.0) { return AffineExpr::variable(i, c); }

// sum_c M(row, c) * exprs[c]
AffineExpr combine(const Eigen::MatrixXd& M, Eigen::Index row, const std::vector<AffineExpr>& exprs) {
  AffineExpr out;
  for (Eigen::Index c = 0; c < M.cols(); ++c) {
    double w = M(row, c);
    if (w != 0.0) out += w * exprs[static_cast<std::size_t>(c)];
  }
  return out;
}

// sum_c M(row, c) * block[c]
AffineExpr combine(const Eigen::MatrixXd& M, Eigen::Index row, const opt::VarBlock& block) {
  AffineExpr out;
  for (Eigen::Index c = 0; c < M.cols(); ++c) {
    double w = M(row, c);
    if (w != 0.0) out.add(block[static_cast<std::size_t>(c)], w);
  }
  return out;
}

// a' [x; y; z]
AffineExpr dot3(const Eigen::Vector3d& a, const std::array<AffineExpr, 3>& d) {
  AffineExpr out;
  for (int k = 0; k < 3; ++k)
    if (a(k) != 0.0) out += a(k) * d[static_cast<std::size_t>(k)];
  return out;
}

}  // namespace

CiaBoundSystem build_cia_constraints(const NetworkMatrices& m, const OperatingPoint& op,
                                     const CiaInjections& in, const CiaVariables& v, double v0,
                                     bool clamp_lower_bound) {
  const std::size_t n = m.size();
  if (in.p_high.size() != n || in.p_low.size() != n || in.q.size() != n || op.branches.size() != n)
    throw std::invalid_argument("build_cia_constraints: dimension mismatch");

  CiaBoundSystem sys;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    AffineExpr Cp_hi = combine(m.C, r, in.p_high);
    AffineExpr Cp_lo = combine(m.C, r, in.p_low);
    AffineExpr Cq = combine(m.C, r, in.q);
    AffineExpr base_hi = AffineExpr(v0) + combine(m.Mp, r, in.p_high) + combine(m.Mq, r, in.q);
    AffineExpr base_lo = AffineExpr(v0) + combine(m.Mp, r, in.p_low) + combine(m.Mq, r, in.q);

    sys.bound_definitions.push_back(
        {Cp_hi - combine(m.DR, r, v.l_lb) - var(v.P_plus[i]), "P_plus"});
    sys.bound_definitions.push_back(
        {Cp_lo - combine(m.DR, r, v.l_ub) - var(v.P_minus[i]), "P_minus"});
    sys.bound_definitions.push_back(
        {Cq - combine(m.DX_plus, r, v.l_lb) - combine(m.DX_minus, r, v.l_ub) - var(v.Q_plus[i]), "Q_plus"});
    sys.bound_definitions.push_back(
        {Cq - combine(m.DX_plus, r, v.l_ub) - combine(m.DX_minus, r, v.l_lb) - var(v.Q_minus[i]), "Q_minus"});
    sys.bound_definitions.push_back(
        {base_hi - combine(m.H_plus, r, v.l_lb) - combine(m.H_minus, r, v.l_ub) - var(v.V_plus[i]), "V_plus"});
    sys.bound_definitions.push_back(
        {base_lo - combine(m.H_plus, r, v.l_ub) - combine(m.H_minus, r, v.l_lb) - var(v.V_minus[i]), "V_minus"});
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& tb = op.branches[i];
    const auto& pt = tb.point;
    const std::array<AffineExpr, 3> d_plus{var(v.P_plus[i]) - AffineExpr(pt.P0), var(v.Q_plus[i]) - AffineExpr(pt.Q0),
                                           var(v.V_plus[i]) - AffineExpr(pt.v0)};
    const std::array<AffineExpr, 3> d_minus{var(v.P_minus[i]) - AffineExpr(pt.P0),
                                            var(v.Q_minus[i]) - AffineExpr(pt.Q0),
                                            var(v.V_minus[i]) - AffineExpr(pt.v0)};

    // l_lb = l0 + J+' d- + J-' d+ (supporting hyperplane of the convex l).
    AffineExpr lower = AffineExpr(tb.l0) + dot3(tb.J_plus, d_minus) + dot3(tb.J_minus, d_plus);
    sys.lower_bound_equalities.push_back({lower - var(v.l_lb[i]), "l_lb"});
    if (clamp_lower_bound) sys.lower_bound_clamps.push_back({var(v.l_lb[i], -1.0), "l_lb_nonneg"});

    // t >= 2 |J' d| over the box, both sign pairings.
    const AffineExpr same = dot3(tb.J_plus, d_plus) + dot3(tb.J_minus, d_minus);
    const AffineExpr mixed = dot3(tb.J_plus, d_minus) + dot3(tb.J_minus, d_plus);
    sys.epigraph_linear.push_back({2.0 * same - var(v.t[i]), "t_lin"});
    sys.epigraph_linear.push_back({-2.0 * same - var(v.t[i]), "t_lin"});
    sys.epigraph_linear.push_back({2.0 * mixed - var(v.t[i]), "t_lin"});
    sys.epigraph_linear.push_back({-2.0 * mixed - var(v.t[i]), "t_lin"});

    // t >= dc' He dc for every mixed corner dc, written as ||F dc||^2 - t <= 0.
    for (unsigned mask = 0; mask < 8; ++mask) {
      std::array<AffineExpr, 3> corner;
      for (int k = 0; k < 3; ++k)
        corner[static_cast<std::size_t>(k)] = ((mask >> k) & 1U) ? d_minus[static_cast<std::size_t>(k)]
                                                                 : d_plus[static_cast<std::size_t>(k)];
      opt::QuadConstraint quad;
      for (int row = 0; row < 3; ++row) {
        if (tb.factor.row(row).cwiseAbs().maxCoeff() == 0.0) continue;
        quad.factor_rows.push_back(dot3(tb.factor.row(row).transpose(), corner));
      }
      quad.linear = var(v.t[i], -1.0);
      quad.label = "t_quad";
      sys.epigraph_quadratic.push_back(std::move(quad));
    }

    sys.upper_links.push_back({AffineExpr(tb.l0) + var(v.t[i]) - var(v.l_ub[i]), "l_ub"});
  }
  return sys;
}

void CiaBoundSystem::add_to(opt::ConvexProgram& program) const {
  for (const auto& row : bound_definitions) program.add_affine_eq(row.expr, 0.0, row.label);
  for (const auto& row : lower_bound_equalities) program.add_affine_eq(row.expr, 0.0, row.label);
  for (const auto& row : lower_bound_clamps) program.add_affine_ineq(row.expr, 0.0, row.label);
  for (const auto& row : epigraph_linear) program.add_affine_ineq(row.expr, 0.0, row.label);
  for (const auto& q : epigraph_quadratic) program.add_convex_quad(q.factor_rows, q.linear, q.label);
  for (const auto& row : upper_links) program.add_affine_ineq(row.expr, 0.0, row.label);
}

void add_network_limits(opt::ConvexProgram& program, const FeederModel& feeder, const CiaVariables& v) {
  for (std::size_t i = 0; i < feeder.node_count; ++i) {
    program.add_affine_ineq(var(v.V_minus[i], -1.0), -feeder.v_min[i], "v_min");
    program.add_affine_ineq(var(v.V_plus[i]), feeder.v_max[i], "v_max");
    program.add_affine_ineq(var(v.l_ub[i]), feeder.branches[i].l_max, "l_max");
  }
}

void dump_operating_point_csv(const OperatingPoint& op, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(12);
  out << "branch,P0,Q0,v0,l0,J_P,J_Q,J_v,eig_0,eig_1,eig_2\n";
  for (std::size_t k = 0; k < op.branches.size(); ++k) {
    const auto& b = op.branches[k];
    out << k + 1 << ',' << b.point.P0 << ',' << b.point.Q0 << ',' << b.point.v0 << ',' << b.l0 << ',' << b.J(0)
        << ',' << b.J(1) << ',' << b.J(2) << ',' << b.eigenvalues(0) << ',' << b.eigenvalues(1) << ','
        << b.eigenvalues(2) << '\n';
  }
}

}  // namespace gridmarket
