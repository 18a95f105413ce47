#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gridmarket/compare.hpp"
#include "gridmarket/market.hpp"
#include "gridmarket/network_matrices.hpp"
#include "gridmarket/report.hpp"

namespace py = pybind11;
using namespace gridmarket;

namespace {

py::dict flow_dict(const PowerFlowSolution& s) {
  py::dict d;
  d["V"] = s.V;
  d["l"] = s.l;
  d["P"] = s.P;
  d["Q"] = s.Q;
  d["converged"] = s.converged;
  d["iterations"] = s.iterations;
  d["residual"] = s.residual;
  d["diagnostic"] = s.diagnostic;
  return d;
}

py::dict feasibility_dict(const FeasibilityResult& f) {
  py::dict d;
  d["direction"] = to_string(f.direction);
  d["robust"] = f.robust;
  d["feasible"] = f.feasible;
  d["max_slack_mw"] = f.max_slack_mw();
  std::vector<double> slack;
  for (double s : f.slack) slack.push_back(pu_to_mw(s, f.base_mva));
  d["slack_mw"] = slack;
  return d;
}

py::dict allocation_dict(const AllocationResult& r) {
  py::dict d;
  d["direction"] = to_string(r.direction);
  d["robust"] = r.robust;
  d["aggregators"] = r.aggregator_ids;
  std::vector<std::vector<double>> mw;
  for (const auto& row : r.allocation) {
    std::vector<double> out;
    for (double a : row) out.push_back(pu_to_mw(a, r.base_mva));
    mw.push_back(out);
  }
  d["allocation_mw"] = mw;
  d["clearing_price"] = r.clearing_price;
  d["revenue"] = r.revenue;
  d["objective"] = r.objective;
  d["nodal_fraction"] = r.nodal_fraction;
  d["aggregator_fraction"] = r.aggregator_fraction;
  d["tie_nodes"] = r.tie_nodes;
  d["total_mw"] = pu_to_mw(r.total(), r.base_mva);
  return d;
}

MarketScenario make_scenario(const std::string& feeder, const std::string& bids, const std::string& demand,
                             const std::string& direction, bool robust, double epsilon_watts) {
  MarketScenario s;
  auto loaded = load_feeder_file(feeder);
  s.feeder = std::move(loaded.feeder);
  s.demand = demand.empty() ? std::move(loaded.demand) : load_demand(demand, s.feeder);
  s.bids = load_bids(bids, s.feeder);
  s.direction = direction_from_string(direction);
  s.robust = robust;
  s.epsilon_watts = epsilon_watts;
  s.validate();
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Grid-aware flexibility market on radial feeders";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<FeederModel>(m, "Feeder")
      .def_readonly("node_count", &FeederModel::node_count)
      .def_readonly("v0", &FeederModel::v0)
      .def_readonly("v_min", &FeederModel::v_min)
      .def_readonly("v_max", &FeederModel::v_max)
      .def_readonly("base_mva", &FeederModel::base_mva)
      .def_readonly("base_kv", &FeederModel::base_kv)
      .def_readonly("order", &FeederModel::order)
      .def("parent", &FeederModel::parent)
      .def("name", &FeederModel::name);

  py::class_<DemandProfile>(m, "Demand")
      .def_readonly("p_load", &DemandProfile::p_load)
      .def_readonly("q_load", &DemandProfile::q_load)
      .def_readonly("d_plus", &DemandProfile::d_plus)
      .def_readonly("d_minus", &DemandProfile::d_minus);

  py::class_<MarketScenario>(m, "Scenario")
      .def(py::init(&make_scenario), py::arg("feeder"), py::arg("bids"), py::arg("demand") = "",
           py::arg("direction") = "upper", py::arg("robust") = false, py::arg("epsilon_watts") = 10.0)
      .def_readonly("feeder", &MarketScenario::feeder)
      .def_readonly("demand", &MarketScenario::demand)
      .def_property_readonly("flexible_nodes", &MarketScenario::flexible_nodes);

  m.def(
      "load_feeder",
      [](const std::string& path) {
        auto loaded = load_feeder_file(path);
        return py::make_tuple(loaded.feeder, loaded.demand);
      },
      py::arg("path"), "Feeder and embedded demand from a JSON or CSV file.");

  m.def(
      "build_matrices",
      [](const FeederModel& f) {
        auto mats = build_matrices(f);
        py::dict d;
        d["A"] = mats.A;
        d["C"] = mats.C;
        d["DR"] = mats.DR;
        d["DX"] = mats.DX;
        d["Mp"] = mats.Mp;
        d["Mq"] = mats.Mq;
        d["H"] = mats.H;
        return d;
      },
      py::arg("feeder"));

  m.def(
      "solve_distflow",
      [](const FeederModel& f, const std::vector<double>& p, const std::vector<double>& q) {
        return flow_dict(solve_distflow(f, p, q));
      },
      py::arg("feeder"), py::arg("p"), py::arg("q"), "Exact branch-flow solution for net injections (p.u.).");

  m.def("two_node_voltage", &solve_two_node_exact, py::arg("r"), py::arg("x"), py::arg("p"), py::arg("q"),
        py::arg("v0") = 1.0, "High-voltage root of the two-node branch-flow equations.");

  m.def(
      "step1",
      [](const MarketScenario& s) { return feasibility_dict(step1_feasibility(s)); },
      py::arg("scenario"));
  m.def(
      "step2",
      [](const MarketScenario& s, const std::string& price_rule) {
        MarketOptions o;
        o.price_rule = price_rule_from_string(price_rule);
        return allocation_dict(step2_allocate(s, o));
      },
      py::arg("scenario"), py::arg("price_rule") = "min-allocated");

  m.def(
      "run",
      [](const MarketScenario& s, std::size_t audit_samples, std::uint64_t seed) {
        auto out = run_market(s);
        const auto result = out.cleared ? *out.cleared : accept_all(s);
        py::dict d;
        d["accepted_all"] = out.accepted_all();
        d["feasibility"] = feasibility_dict(out.feasibility);
        d["allocation"] = allocation_dict(result);
        if (audit_samples > 0) {
          auto a = audit_allocation(s, result, audit_samples, seed);
          py::dict audit;
          audit["samples"] = a.samples;
          audit["corners"] = a.corners;
          audit["evaluated"] = a.samples + a.corners;
          audit["violating"] = a.violating_samples;
          audit["worst_violation"] = a.worst_violation;
          audit["clean"] = a.clean();
          d["audit"] = audit;
        }
        return d;
      },
      py::arg("scenario"), py::arg("audit_samples") = 200, py::arg("seed") = 1,
      "Two-step market followed by an admissibility audit of the cleared box.");

  m.def(
      "compare",
      [](const FeederModel& f, const DemandProfile& d, const std::vector<double>& caps_mw,
         const std::vector<int>& nodes) { return compare_csv(compare_methods(f, d, caps_mw, nodes)); },
      py::arg("feeder"), py::arg("demand"), py::arg("caps_mw"), py::arg("nodes") = std::vector<int>{},
      "CSV sweep of injection caps across the linear, relaxed, inner and exact models.");
}
