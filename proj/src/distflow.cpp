#include "gridmarket/distflow.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gridmarket/convex_program.hpp"
#include "gridmarket/network_matrices.hpp"

namespace gridmarket {

double PowerFlowSolution::max_voltage() const {
  return V.empty() ? 0.0 : *std::max_element(V.begin(), V.end());
}

double PowerFlowSolution::min_voltage() const {
  return V.empty() ? 0.0 : *std::min_element(V.begin(), V.end());
}

namespace {

void check_injection_size(const FeederModel& feeder, const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != feeder.node_count || q.size() != feeder.node_count)
    throw std::invalid_argument("injection vectors must have one entry per node");
  for (std::size_t k = 0; k < p.size(); ++k)
    if (!std::isfinite(p[k]) || !std::isfinite(q[k])) throw std::invalid_argument("injections must be finite");
}

double upstream_voltage(const FeederModel& feeder, const std::vector<double>& V, int node) {
  int parent = feeder.parent(node);
  return parent == 0 ? feeder.v0 : V[static_cast<std::size_t>(parent - 1)];
}

}  // namespace

PowerFlowSolution solve_distflow(const FeederModel& feeder, const std::vector<double>& p,
                                 const std::vector<double>& q, const SweepOptions& options) {
  check_injection_size(feeder, p, q);
  const std::size_t n = feeder.node_count;
  const auto children = feeder.children();

  PowerFlowSolution s;
  s.V.assign(n, feeder.v0);
  s.l.assign(n, 0.0);
  s.P.assign(n, 0.0);
  s.Q.assign(n, 0.0);

  auto backward = [&] {
    for (auto it = feeder.order.rbegin(); it != feeder.order.rend(); ++it) {
      const auto k = static_cast<std::size_t>(*it - 1);
      double P = p[k];
      double Q = q[k];
      for (int c : children[static_cast<std::size_t>(*it)]) {
        const auto kc = static_cast<std::size_t>(c - 1);
        P += s.P[kc] - feeder.branches[kc].r * s.l[kc];
        Q += s.Q[kc] - feeder.branches[kc].x * s.l[kc];
      }
      s.P[k] = P;
      s.Q[k] = Q;
    }
  };

  // Returns max |dv|, or NaN on collapse.
  auto forward = [&] {
    double dv = 0.0;
    for (int node : feeder.order) {
      const auto k = static_cast<std::size_t>(node - 1);
      const auto& br = feeder.branches[k];
      double v = upstream_voltage(feeder, s.V, node) + 2.0 * br.r * s.P[k] + 2.0 * br.x * s.Q[k] -
                 br.z_squared() * s.l[k];
      if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
      dv = std::max(dv, std::abs(v - s.V[k]));
      s.V[k] = v;
    }
    return dv;
  };

  auto update_currents = [&] {
    for (std::size_t k = 0; k < n; ++k) s.l[k] = (s.P[k] * s.P[k] + s.Q[k] * s.Q[k]) / s.V[k];
  };

  for (int it = 1; it <= options.max_iterations; ++it) {
    s.iterations = it;
    backward();
    double dv = forward();
    if (std::isnan(dv)) {
      s.diagnostic = "voltage collapse: nonpositive squared voltage during sweep";
      s.converged = false;
      s.residual = std::numeric_limits<double>::infinity();
      return s;
    }
    update_currents();
    if (dv < options.tolerance) {
      backward();
      forward();
      update_currents();
      s.residual = distflow_residual(feeder, p, q, s);
      s.converged = s.residual < 1e-8;
      if (!s.converged) s.diagnostic = "sweep stalled with residual " + std::to_string(s.residual);
      return s;
    }
  }
  s.residual = distflow_residual(feeder, p, q, s);
  s.converged = false;
  s.diagnostic = "no fixed point after " + std::to_string(options.max_iterations) + " sweeps";
  return s;
}

double distflow_residual(const FeederModel& feeder, const std::vector<double>& p, const std::vector<double>& q,
                         const PowerFlowSolution& s) {
  const auto children = feeder.children();
  double worst = 0.0;
  for (int node = 1; node <= static_cast<int>(feeder.node_count); ++node) {
    const auto k = static_cast<std::size_t>(node - 1);
    const auto& br = feeder.branches[k];
    double volt = s.V[k] - (upstream_voltage(feeder, s.V, node) + 2.0 * br.r * s.P[k] + 2.0 * br.x * s.Q[k] -
                            br.z_squared() * s.l[k]);
    double P = p[k];
    double Q = q[k];
    for (int c : children[static_cast<std::size_t>(node)]) {
      const auto kc = static_cast<std::size_t>(c - 1);
      P += s.P[kc] - feeder.branches[kc].r * s.l[kc];
      Q += s.Q[kc] - feeder.branches[kc].x * s.l[kc];
    }
    double cur = s.l[k] - (s.P[k] * s.P[k] + s.Q[k] * s.Q[k]) / s.V[k];
    worst = std::max({worst, std::abs(volt), std::abs(s.P[k] - P), std::abs(s.Q[k] - Q), std::abs(cur)});
  }
  return worst;
}

double solve_two_node_exact(double r, double x, double p, double q, double v0) {
  if (!(v0 > 0.0)) throw std::domain_error("substation voltage must be positive");
  const double b = v0 + 2.0 * r * p + 2.0 * x * q;
  const double c = (r * r + x * x) * (p * p + q * q);
  const double disc = b * b - 4.0 * c;
  if (disc < 0.0 || b <= 0.0) throw std::domain_error("no power-flow solution: injection exceeds deliverable power");
  // Larger root, computed without cancellation.
  return 0.5 * (b + std::sqrt(disc));
}

PowerFlowSolution solve_lindist(const FeederModel& feeder, const std::vector<double>& p,
                                const std::vector<double>& q) {
  check_injection_size(feeder, p, q);
  const auto m = build_matrices(feeder);
  const auto n = static_cast<Eigen::Index>(feeder.node_count);
  Eigen::Map<const Eigen::VectorXd> pv(p.data(), n), qv(q.data(), n);
  Eigen::VectorXd V = Eigen::VectorXd::Constant(n, feeder.v0) + m.Mp * pv + m.Mq * qv;
  Eigen::VectorXd P = m.C * pv;
  Eigen::VectorXd Q = m.C * qv;
  PowerFlowSolution s;
  s.V.assign(V.data(), V.data() + n);
  s.P.assign(P.data(), P.data() + n);
  s.Q.assign(Q.data(), Q.data() + n);
  s.l.assign(static_cast<std::size_t>(n), 0.0);
  s.converged = true;
  s.iterations = 1;
  return s;
}

std::string to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::voltage_low:
      return "voltage_low";
    case Violation::Kind::voltage_high:
      return "voltage_high";
    case Violation::Kind::current_high:
      return "current_high";
  }
  return "unknown";
}

ViolationReport check_admissible(const FeederModel& feeder, const std::vector<double>& p,
                                 const std::vector<double>& q, const AdmissibilityTolerance& tol) {
  ViolationReport report;
  auto s = solve_distflow(feeder, p, q);
  if (!s.converged) {
    report.converged = false;
    report.diagnostic = s.diagnostic;
    report.worst_violation = std::numeric_limits<double>::infinity();
    return report;
  }
  for (std::size_t k = 0; k < feeder.node_count; ++k) {
    const int node = static_cast<int>(k + 1);
    double low = feeder.v_min[k] - tol.voltage - s.V[k];
    double high = s.V[k] - feeder.v_max[k] - tol.voltage;
    double cur = s.l[k] - feeder.branches[k].l_max - tol.current;
    report.worst_violation = std::max({report.worst_violation, low, high, cur});
    if (low > 0.0) report.voltage.push_back({Violation::Kind::voltage_low, node, s.V[k], feeder.v_min[k]});
    if (high > 0.0) report.voltage.push_back({Violation::Kind::voltage_high, node, s.V[k], feeder.v_max[k]});
    if (cur > 0.0) report.current.push_back({Violation::Kind::current_high, node, s.l[k], feeder.branches[k].l_max});
  }
  return report;
}

std::vector<std::vector<double>> box_corners(const std::vector<double>& lower, const std::vector<double>& upper,
                                             std::size_t max_corners) {
  std::vector<std::size_t> dims;
  for (std::size_t k = 0; k < lower.size(); ++k)
    if (upper[k] > lower[k]) dims.push_back(k);

  std::vector<std::vector<double>> out;
  auto make = [&](auto pick_upper) {
    std::vector<double> c = lower;
    for (std::size_t d = 0; d < dims.size(); ++d)
      if (pick_upper(d)) c[dims[d]] = upper[dims[d]];
    return c;
  };
  auto push_unique = [&](std::vector<double> c) {
    if (out.size() >= max_corners) return;
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
  };

  push_unique(make([](std::size_t) { return true; }));
  push_unique(make([](std::size_t) { return false; }));
  for (std::size_t f = 0; f < dims.size(); ++f) {
    push_unique(make([f](std::size_t d) { return d != f; }));
    push_unique(make([f](std::size_t d) { return d == f; }));
  }
  if (dims.size() < 63) {
    const std::uint64_t total = std::uint64_t{1} << dims.size();
    for (std::uint64_t mask = 0; mask < total && out.size() < max_corners; ++mask)
      push_unique(make([mask](std::size_t d) { return ((mask >> d) & 1U) != 0; }));
  }
  return out;
}

BoxAuditReport sample_box_admissibility(const FeederModel& feeder, const DemandProfile& demand,
                                        const std::vector<double>& lower, const std::vector<double>& upper,
                                        std::size_t samples, std::uint64_t seed, const AdmissibilityTolerance& tol) {
  const std::size_t n = feeder.node_count;
  if (lower.size() != n || upper.size() != n) throw std::invalid_argument("box must have one interval per node");
  for (std::size_t k = 0; k < n; ++k)
    if (lower[k] > upper[k]) throw std::invalid_argument("box interval with lower > upper");

  // Dispatch list is fixed before evaluation so the report depends only on
  // (box, samples, seed).
  auto dispatches = box_corners(lower, upper, 64);
  BoxAuditReport report;
  report.corners = dispatches.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) d[k] = lower[k] + (upper[k] - lower[k]) * unit(rng);
    dispatches.push_back(std::move(d));
  }
  report.samples = samples;

  std::vector<double> q(n);
  for (std::size_t k = 0; k < n; ++k) q[k] = -demand.q_load[k];
  for (const auto& d : dispatches) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = d[k] - demand.p_load[k];
    auto r = check_admissible(feeder, p, q, tol);
    if (!r.converged) ++report.nonconverged;
    if (!r.clean()) ++report.violating_samples;
    if (r.worst_violation > report.worst_violation || report.worst_dispatch.empty()) {
      report.worst_violation = r.worst_violation;
      report.worst = r;
      report.worst_dispatch = d;
    }
  }
  return report;
}

SocpRelaxationResult solve_socp_relaxation(const FeederModel& feeder, const DemandProfile& demand, double p_max,
                                           SocpCapMode mode, const std::vector<int>& injection_nodes) {
  using namespace opt;
  const std::size_t n = feeder.node_count;
  std::vector<bool> injects(n, injection_nodes.empty());
  for (int node : injection_nodes) injects.at(static_cast<std::size_t>(node - 1)) = true;

  ConvexProgram prog;
  auto pg = prog.add_variable("pg", n, 0.0);
  auto P = prog.add_variable("P", n);
  auto Q = prog.add_variable("Q", n);
  auto l = prog.add_variable("l", n, 0.0);
  auto v = prog.add_variable("v", n);
  const auto children = feeder.children();

  for (std::size_t k = 0; k < n; ++k) {
    const int node = static_cast<int>(k + 1);
    const auto& br = feeder.branches[k];
    if (!injects[k]) prog.add_affine_eq(AffineExpr::variable(pg[k]), 0.0, "no_injection");
    AffineExpr pb = AffineExpr::variable(P[k]) - AffineExpr::variable(pg[k]);
    AffineExpr qb = AffineExpr::variable(Q[k]);
    for (int c : children[static_cast<std::size_t>(node)]) {
      const auto kc = static_cast<std::size_t>(c - 1);
      pb.add(P[kc], -1.0).add(l[kc], feeder.branches[kc].r);
      qb.add(Q[kc], -1.0).add(l[kc], feeder.branches[kc].x);
    }
    prog.add_affine_eq(pb, -demand.p_load[k], "p_balance");
    prog.add_affine_eq(qb, -demand.q_load[k], "q_balance");

    AffineExpr volt = AffineExpr::variable(v[k]);
    volt.add(P[k], -2.0 * br.r).add(Q[k], -2.0 * br.x).add(l[k], br.z_squared());
    if (br.from == 0) {
      prog.add_affine_eq(volt, feeder.v0, "voltage_drop");
    } else {
      volt.add(v[static_cast<std::size_t>(br.from - 1)], -1.0);
      prog.add_affine_eq(volt, 0.0, "voltage_drop");
    }
    prog.add_affine_ineq(AffineExpr::variable(v[k]), feeder.v_max[k], "v_max");
    prog.add_affine_ineq(AffineExpr::variable(v[k], -1.0), -feeder.v_min[k], "v_min");
    prog.add_affine_ineq(AffineExpr::variable(l[k]), br.l_max, "l_max");
    // P^2 + Q^2 <= l v  <=>  || (2P, 2Q, l - v) || <= l + v
    prog.add_soc({AffineExpr::variable(P[k], 2.0), AffineExpr::variable(Q[k], 2.0),
                  AffineExpr::variable(l[k]) - AffineExpr::variable(v[k])},
                 AffineExpr::variable(l[k]) + AffineExpr::variable(v[k]), "current_cone");
    if (mode == SocpCapMode::per_node && injects[k]) prog.add_affine_ineq(AffineExpr::variable(pg[k]), p_max, "cap");
  }
  AffineExpr total;
  for (std::size_t k = 0; k < n; ++k) total.add(pg[k], 1.0);
  if (mode == SocpCapMode::total) prog.add_affine_ineq(total, p_max, "cap");
  prog.set_objective(total, Sense::maximize);

  auto sol = solve(prog);
  SocpRelaxationResult out;
  out.status = to_string(sol.status);
  if (!sol.optimal()) return out;
  out.solved = true;
  out.injection = sol.value(pg);
  for (auto& x : out.injection) x = std::max(0.0, x);
  out.total_injection = sol.objective;
  out.relaxed.V = sol.value(v);
  out.relaxed.l = sol.value(l);
  out.relaxed.P = sol.value(P);
  out.relaxed.Q = sol.value(Q);
  out.relaxed.converged = true;
  out.claimed_max_voltage = out.relaxed.max_voltage();
  for (std::size_t k = 0; k < n; ++k) {
    double gap = out.relaxed.l[k] * out.relaxed.V[k] -
                 (out.relaxed.P[k] * out.relaxed.P[k] + out.relaxed.Q[k] * out.relaxed.Q[k]);
    out.max_cone_gap = std::max(out.max_cone_gap, gap);
  }
  std::vector<double> p(n), q(n);
  for (std::size_t k = 0; k < n; ++k) {
    p[k] = out.injection[k] - demand.p_load[k];
    q[k] = -demand.q_load[k];
  }
  out.exact = solve_distflow(feeder, p, q);
  out.true_max_voltage = out.exact.converged ? out.exact.max_voltage() : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace gridmarket
