// gridmarket: command-line front end for the flexibility market.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridmarket/cia.hpp"
#include "gridmarket/compare.hpp"
#include "gridmarket/market.hpp"
#include "gridmarket/network_matrices.hpp"
#include "gridmarket/report.hpp"

namespace fs = std::filesystem;
using namespace gridmarket;

namespace {

enum ExitCode { kOk = 0, kInputError = 1, kSolverFailure = 2, kAuditViolation = 3 };

struct Config {
  std::string feeder;
  std::string bids;
  std::string demand;
  std::string direction = "upper";
  bool robust = false;
  double epsilon_watts = 10.0;
  std::size_t audit_samples = 200;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string format = "json";
  std::string price_rule = "min-allocated";
  std::string dump_matrices;
  std::string dump_cia;
  std::string export_lp;
  std::vector<double> pmax;
  std::vector<int> nodes;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

MarketScenario load_scenario(const Config& c, bool need_bids) {
  MarketScenario s;
  auto loaded = load_feeder_file(c.feeder);
  s.feeder = std::move(loaded.feeder);
  s.demand = c.demand.empty() ? std::move(loaded.demand) : load_demand(c.demand, s.feeder);
  if (need_bids || !c.bids.empty()) {
    if (c.bids.empty()) throw InputError("--bids is required for this command");
    s.bids = load_bids(c.bids, s.feeder);
  }
  s.direction = direction_from_string(c.direction);
  s.robust = c.robust;
  s.epsilon_watts = c.epsilon_watts;
  if (need_bids) s.validate();
  return s;
}

MarketOptions options_of(const Config& c) {
  MarketOptions o;
  o.price_rule = price_rule_from_string(c.price_rule);
  return o;
}

void write_debug(const Config& c, const MarketScenario& s, const opt::ConvexProgram* program) {
  if (!c.dump_matrices.empty()) {
    fs::create_directories(c.dump_matrices);
    dump_matrices_csv(build_matrices(s.feeder), c.dump_matrices);
  }
  if (!c.dump_cia.empty()) dump_operating_point_csv(compute_operating_point(s.feeder, s.demand), c.dump_cia);
  if (!c.export_lp.empty() && program) {
    std::ostringstream text;
    program->write_lp(text);
    write_file(c.export_lp, text.str());
  }
}

std::size_t price_levels(const AllocationResult& r) {
  std::set<double> levels;
  for (const auto& p : r.clearing_price)
    if (p) levels.insert(round12(*p));
  return levels.size();
}

void print_feasibility(const FeasibilityResult& f) {
  std::printf("step 1 (%s%s): max slack %.6f MW %s epsilon %.6g MW\n", to_string(f.direction).c_str(),
              f.robust ? ", robust" : "", f.max_slack_mw(), f.feasible ? "<=" : ">", pu_to_mw(f.epsilon, f.base_mva));
}

void print_allocation(const AllocationResult& r) {
  double offered = 0.0;
  for (const auto& row : r.bid)
    for (double b : row) offered += b;
  std::printf("allocated %.6f of %.6f MW, revenue $%.2f, %zu clearing price level(s)", pu_to_mw(r.total(), r.base_mva),
              pu_to_mw(offered, r.base_mva), r.revenue, price_levels(r));
  if (!r.tie_nodes.empty()) std::printf(", %zu tie node(s)", r.tie_nodes.size());
  std::printf("\n");
}

void write_allocation(const Config& c, const MarketScenario& s, const AllocationResult& r, bool accepted_all) {
  const fs::path out(c.out);
  write_file(out / "allocation.json", allocation_json(s, r, accepted_all));
  write_file(out / "prices.csv", prices_csv(s, r));
  if (c.format == "csv") write_file(out / "allocation.csv", allocation_csv(s, r));
}

void write_feasibility(const Config& c, const MarketScenario& s, const FeasibilityResult& f) {
  const fs::path out(c.out);
  write_file(out / "feasibility.json", feasibility_json(s, f));
  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "node,name,slack_mw\n";
    for (std::size_t k = 0; k < f.slack.size(); ++k) {
      const int node = static_cast<int>(k + 1);
      csv << node << ',' << s.feeder.name(node) << ',' << format12(pu_to_mw(f.slack[k], f.base_mva)) << '\n';
    }
    write_file(out / "slack.csv", csv.str());
  }
}

int cmd_validate(const Config& c) {
  nlohmann::ordered_json report;
  try {
    auto s = load_scenario(c, false);
    report = {{"valid", true},
              {"nodes", s.feeder.node_count},
              {"aggregators", s.bids.size()},
              {"flexible_nodes", s.bids.empty() ? std::vector<int>{} : s.flexible_nodes()}};
    std::cout << report.dump(2) << "\n";
    return kOk;
  } catch (const InputError& e) {
    std::vector<std::string> errors = e.problems();
    if (errors.empty()) errors.push_back(e.what());
    std::string summary = e.what();
    summary = summary.substr(0, summary.find('\n'));
    report = {{"valid", false}, {"error", summary}, {"problems", errors}};
    std::cout << report.dump(2) << "\n";
    return kInputError;
  }
}

int cmd_step1(const Config& c) {
  auto s = load_scenario(c, true);
  auto opts = options_of(c);
  auto program = build_step1_program(s, opts);
  write_debug(c, s, &program);
  auto f = step1_feasibility(s, opts);
  write_feasibility(c, s, f);
  print_feasibility(f);
  return kOk;
}

int cmd_clear(const Config& c) {
  auto s = load_scenario(c, true);
  auto opts = options_of(c);
  auto program = build_step2_program(s, opts);
  write_debug(c, s, &program);
  auto r = step2_allocate(s, opts);
  write_allocation(c, s, r, false);
  print_allocation(r);
  return kOk;
}

int cmd_run(const Config& c) {
  auto s = load_scenario(c, true);
  auto opts = options_of(c);
  write_debug(c, s, nullptr);
  if (!c.export_lp.empty()) {
    std::ostringstream text;
    build_step1_program(s, opts).write_lp(text);
    text << "\n";
    build_step2_program(s, opts).write_lp(text);
    write_file(c.export_lp, text.str());
  }
  auto outcome = run_market(s, opts);
  write_feasibility(c, s, outcome.feasibility);
  const AllocationResult result = outcome.cleared ? *outcome.cleared : accept_all(s, opts.price_rule);
  write_allocation(c, s, result, outcome.accepted_all());

  if (outcome.accepted_all()) {
    std::printf("ACCEPTED ALL (max slack %.3f MW <= epsilon)\n", outcome.feasibility.max_slack_mw());
  } else {
    std::printf("CLEARED (max slack %.3f MW > epsilon)\n", outcome.feasibility.max_slack_mw());
    print_allocation(result);
  }

  if (c.audit_samples > 0) {
    auto audit = audit_allocation(s, result, c.audit_samples, c.seed);
    write_file(fs::path(c.out) / "audit.json", audit_json(s, audit, c.audit_samples, c.seed));
    std::printf("audit: %zu samples + %zu corners, %zu violating, worst excess %.3g\n", audit.samples, audit.corners,
                audit.violating_samples, audit.worst_violation);
    if (!audit.clean()) {
      std::fprintf(stderr, "error: admissibility audit found violations inside the certified box\n");
      return kAuditViolation;
    }
  }
  return kOk;
}

int cmd_compare(const Config& c) {
  auto s = load_scenario(c, false);
  std::vector<double> caps = c.pmax;
  if (caps.empty())
    for (int i = 0; i <= 10; ++i) caps.push_back(0.5 * i);
  auto rows = compare_methods(s.feeder, s.demand, caps, c.nodes);
  const std::string csv = compare_csv(rows);
  write_file(fs::path(c.out) / "compare.csv", csv);
  std::cout << csv;
  return kOk;
}

void add_common(CLI::App* sub, Config& c, bool bids_required) {
  sub->add_option("--feeder", c.feeder, "Feeder file (.json or .csv)")->required()->check(CLI::ExistingFile);
  auto* bids = sub->add_option("--bids", c.bids, "Aggregator bids file (.json or .csv)")->check(CLI::ExistingFile);
  if (bids_required) bids->required();
  sub->add_option("--demand", c.demand, "Demand file overriding the feeder's nodal demand")->check(CLI::ExistingFile);
  sub->add_option("--direction", c.direction, "Flexibility range to clear")
      ->check(CLI::IsMember({"upper", "lower"}))
      ->capture_default_str();
  sub->add_flag("--robust", c.robust, "Reserve headroom for the demand uncertainty bounds");
  sub->add_option("--epsilon-watts", c.epsilon_watts, "Slack tolerance in watts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--format", c.format, "Report format; csv adds CSV mirrors")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sub->add_option("--price-rule", c.price_rule, "Clearing price rule")
      ->check(CLI::IsMember({"min-allocated", "marginal"}))
      ->capture_default_str();
  sub->add_option("--dump-matrices", c.dump_matrices, "Write network matrices as CSV into this directory");
  sub->add_option("--dump-cia", c.dump_cia, "Write per-branch operating-point data as CSV");
  sub->add_option("--export-lp", c.export_lp, "Write the optimization program(s) in LP-like text");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-aware day-ahead market for aggregator flexibility"};
  app.require_subcommand(1);
  Config c;

  auto* validate = app.add_subcommand("validate", "Load and validate feeder, demand and bids");
  add_common(validate, c, false);
  auto* step1 = app.add_subcommand("step1", "Feasibility check of the full bid set");
  add_common(step1, c, true);
  auto* clear = app.add_subcommand("clear", "Grid-aware allocation, prices and revenue");
  add_common(clear, c, true);
  auto* run = app.add_subcommand("run", "Full two-step market with admissibility audit");
  add_common(run, c, true);
  run->add_option("--audit-samples", c.audit_samples, "Uniform samples for the audit (0 disables)")
      ->capture_default_str();
  run->add_option("--seed", c.seed, "Seed of the audit sampler")->capture_default_str();
  auto* compare = app.add_subcommand("compare", "Sweep total injection cap across network models");
  add_common(compare, c, false);
  compare->add_option("--pmax", c.pmax, "Total injection caps in MW")->delimiter(',');
  compare->add_option("--nodes", c.nodes, "Injection nodes (default: all)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*validate) return cmd_validate(c);
    if (*step1) return cmd_step1(c);
    if (*clear) return cmd_clear(c);
    if (*run) return cmd_run(c);
    if (*compare) return cmd_compare(c);
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    for (const auto& p : e.problems()) std::fprintf(stderr, "  - %s\n", p.c_str());
    return kInputError;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverFailure;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverFailure;
  } catch (const opt::BackendUnavailable& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolverFailure;
  }
  return kOk;
}
