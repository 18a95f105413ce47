#include "gridmarket/compare.hpp"

#include <algorithm>
#include <cmath>

#include "gridmarket/cia.hpp"
#include "gridmarket/convex_program.hpp"
#include "gridmarket/network_matrices.hpp"

namespace gridmarket {

using opt::AffineExpr;

namespace {

std::vector<bool> injection_mask(std::size_t n, const std::vector<int>& nodes) {
  std::vector<bool> mask(n, nodes.empty());
  for (int node : nodes) mask.at(static_cast<std::size_t>(node - 1)) = true;
  return mask;
}

void finish_exact(InjectionLimit& out, const FeederModel& feeder, const DemandProfile& demand) {
  const std::size_t n = feeder.node_count;
  std::vector<double> p(n), q(n);
  for (std::size_t k = 0; k < n; ++k) {
    p[k] = out.injection[k] - demand.p_load[k];
    q[k] = -demand.q_load[k];
  }
  out.exact = solve_distflow(feeder, p, q);
}

// Flexible magnitudes g >= 0 at the masked nodes with sum g <= cap.
std::vector<AffineExpr> add_magnitudes(opt::ConvexProgram& prog, const std::vector<bool>& mask, double cap,
                                       opt::VarBlock& block) {
  const std::size_t n = mask.size();
  block = prog.add_variable("g", n, 0.0);
  std::vector<AffineExpr> g(n);
  AffineExpr total;
  for (std::size_t k = 0; k < n; ++k) {
    if (!mask[k]) prog.add_affine_eq(AffineExpr::variable(block[k]), 0.0, "no_injection");
    g[k] = AffineExpr::variable(block[k]);
    total.add(block[k], 1.0);
  }
  prog.add_affine_ineq(total, cap, "cap");
  prog.set_objective(total, opt::Sense::maximize);
  return g;
}

}  // namespace

InjectionLimit lindist_limit(const FeederModel& feeder, const DemandProfile& demand, double cap,
                             const std::vector<int>& nodes, InjectionSense sense) {
  const std::size_t n = feeder.node_count;
  const auto m = build_matrices(feeder);
  const double sign = sense == InjectionSense::raise ? 1.0 : -1.0;
  opt::ConvexProgram prog;
  opt::VarBlock g;
  auto mag = add_magnitudes(prog, injection_mask(n, nodes), cap, g);

  std::vector<AffineExpr> V(n);
  for (std::size_t i = 0; i < n; ++i) {
    V[i] = AffineExpr(feeder.v0);
    for (std::size_t c = 0; c < n; ++c) {
      const auto ic = static_cast<Eigen::Index>(i), cc = static_cast<Eigen::Index>(c);
      V[i] += m.Mp(ic, cc) * (sign * mag[c] - AffineExpr(demand.p_load[c]));
      V[i] += AffineExpr(-m.Mq(ic, cc) * demand.q_load[c]);
    }
    prog.add_affine_ineq(V[i], feeder.v_max[i], "v_max");
    prog.add_affine_ineq(-V[i], -feeder.v_min[i], "v_min");
  }

  auto sol = opt::solve(prog);
  InjectionLimit out;
  out.status = opt::to_string(sol.status);
  if (!sol.optimal()) return out;
  out.injection = sol.value(g);
  for (auto& x : out.injection) x = sign * std::max(0.0, x);
  for (double x : out.injection) out.total += x;
  std::vector<double> p(n), q(n);
  for (std::size_t k = 0; k < n; ++k) {
    p[k] = out.injection[k] - demand.p_load[k];
    q[k] = -demand.q_load[k];
  }
  auto lin = solve_lindist(feeder, p, q);
  out.claimed_max_v = lin.max_voltage();
  out.claimed_min_v = lin.min_voltage();
  finish_exact(out, feeder, demand);
  return out;
}

InjectionLimit cia_limit(const FeederModel& feeder, const DemandProfile& demand, double cap,
                         const std::vector<int>& nodes, InjectionSense sense) {
  const std::size_t n = feeder.node_count;
  const auto m = build_matrices(feeder);
  InjectionLimit out;
  OperatingPoint op;
  try {
    op = compute_operating_point(feeder, demand);
  } catch (const ConvergenceError&) {
    out.status = "no-operating-point";
    return out;
  }

  opt::ConvexProgram prog;
  opt::VarBlock g;
  auto mag = add_magnitudes(prog, injection_mask(n, nodes), cap, g);
  CiaInjections in;
  for (std::size_t k = 0; k < n; ++k) {
    AffineExpr base(-demand.p_load[k]);
    in.p_high.push_back(sense == InjectionSense::raise ? base + mag[k] : base);
    in.p_low.push_back(sense == InjectionSense::raise ? base : base - mag[k]);
    in.q.emplace_back(-demand.q_load[k]);
  }
  auto vars = add_cia_variables(prog, n);
  build_cia_constraints(m, op, in, vars, feeder.v0).add_to(prog);
  add_network_limits(prog, feeder, vars);

  auto sol = opt::solve(prog);
  out.status = opt::to_string(sol.status);
  if (!sol.optimal()) return out;
  const double sign = sense == InjectionSense::raise ? 1.0 : -1.0;
  out.injection = sol.value(g);
  for (auto& x : out.injection) x = sign * std::max(0.0, x);
  for (double x : out.injection) out.total += x;
  auto vp = sol.value(vars.V_plus);
  auto vm = sol.value(vars.V_minus);
  out.claimed_max_v = *std::max_element(vp.begin(), vp.end());
  out.claimed_min_v = *std::min_element(vm.begin(), vm.end());
  finish_exact(out, feeder, demand);
  return out;
}

InjectionLimit socp_limit(const FeederModel& feeder, const DemandProfile& demand, double cap,
                          const std::vector<int>& nodes) {
  auto r = solve_socp_relaxation(feeder, demand, cap, SocpCapMode::total, nodes);
  InjectionLimit out;
  out.status = r.status;
  if (!r.solved) return out;
  out.injection = r.injection;
  out.total = r.total_injection;
  out.claimed_max_v = r.claimed_max_voltage;
  out.claimed_min_v = r.relaxed.min_voltage();
  out.exact = r.exact;
  return out;
}

double exact_limit_grid(const FeederModel& feeder, const DemandProfile& demand, int node, double step,
                        double bound, InjectionSense sense) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  const std::size_t n = feeder.node_count;
  const double sign = sense == InjectionSense::raise ? 1.0 : -1.0;
  std::vector<double> p(n), q(n);
  for (std::size_t k = 0; k < n; ++k) {
    p[k] = -demand.p_load[k];
    q[k] = -demand.q_load[k];
  }
  const auto k = static_cast<std::size_t>(node - 1);
  const double base = p[k];
  const auto steps = static_cast<long>(std::floor(bound / step + 1e-9));
  double last = std::numeric_limits<double>::quiet_NaN();
  for (long i = 0; i <= steps; ++i) {
    const double g = sign * static_cast<double>(i) * step;
    p[k] = base + g;
    if (!check_admissible(feeder, p, q, {0.0, 0.0}).clean()) break;
    last = g;
  }
  return last;
}

std::vector<CompareRow> compare_methods(const FeederModel& feeder, const DemandProfile& demand,
                                        const std::vector<double>& caps_mw, const std::vector<int>& nodes) {
  const std::size_t n = feeder.node_count;
  const auto mask = injection_mask(n, nodes);
  const auto count = static_cast<double>(std::count(mask.begin(), mask.end(), true));
  double v_limit = 0.0;
  for (double v : feeder.v_max) v_limit = std::max(v_limit, std::sqrt(v));

  std::vector<CompareRow> rows;
  for (double cap_mw : caps_mw) {
    const double cap = mw_to_pu(cap_mw, feeder.base_mva);
    auto row_of = [&](const std::string& method, const InjectionLimit& lim) {
      CompareRow row;
      row.method = method;
      row.p_max_mw = cap_mw;
      row.v_max = v_limit;
      row.status = lim.status;
      if (lim.solved()) {
        row.injection_mw = pu_to_mw(lim.total, feeder.base_mva);
        row.claimed_max_voltage = std::sqrt(std::max(0.0, lim.claimed_max_v));
        if (lim.exact.converged) {
          row.true_max_voltage = std::sqrt(lim.exact.max_voltage());
        } else {
          row.status = "exact-diverged";
        }
      }
      return row;
    };
    rows.push_back(row_of("lindist", lindist_limit(feeder, demand, cap, nodes)));
    rows.push_back(row_of("socp", socp_limit(feeder, demand, cap, nodes)));
    rows.push_back(row_of("cia", cia_limit(feeder, demand, cap, nodes)));

    InjectionLimit exact;
    exact.status = "optimal";
    exact.injection.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      if (mask[k] && count > 0.0) exact.injection[k] = cap / count;
    for (double x : exact.injection) exact.total += x;
    finish_exact(exact, feeder, demand);
    if (exact.exact.converged) exact.claimed_max_v = exact.exact.max_voltage();
    rows.push_back(row_of("exact", exact));
  }
  return rows;
}

}  // namespace gridmarket
