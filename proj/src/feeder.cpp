#include "gridmarket/feeder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gridmarket {

using nlohmann::json;

namespace {

std::string join_problems(const std::string& summary, const std::vector<std::string>& problems) {
  std::string out = summary;
  for (const auto& p : problems) out += "\n  - " + p;
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool finite(double v) { return std::isfinite(v); }

// Node record shared by feeder and demand files. Missing values are nullopt.
struct NodeRecord {
  int id = -1;
  std::string name;
  std::optional<double> v_min, v_max, p_load, q_load, d_plus, d_minus;
};

struct BranchRecord {
  int from = -1;
  int to = -1;
  double r = 0.0;
  double x = 0.0;
  std::optional<double> l_max;
};

std::optional<double> optional_number(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw InputError(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

double required_number(const json& obj, const char* key, const std::string& where) {
  auto v = optional_number(obj, key);
  if (!v) throw InputError("missing field '" + std::string(key) + "' in " + where);
  return *v;
}

int required_int(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer())
    throw InputError("missing integer field '" + std::string(key) + "' in " + where);
  return it->get<int>();
}

NodeRecord node_from_json(const json& j) {
  NodeRecord rec;
  rec.id = required_int(j, "id", "node record");
  if (auto it = j.find("name"); it != j.end()) {
    rec.name = it->is_string() ? it->get<std::string>() : it->dump();
  }
  rec.v_min = optional_number(j, "v_min_pu2");
  rec.v_max = optional_number(j, "v_max_pu2");
  rec.p_load = optional_number(j, "p_load_mw");
  rec.q_load = optional_number(j, "q_load_mvar");
  rec.d_plus = optional_number(j, "d_plus_mw");
  rec.d_minus = optional_number(j, "d_minus_mw");
  return rec;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> csv_number(const std::vector<std::string>& cells, std::size_t i, int line_no) {
  if (i >= cells.size() || cells[i].empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    double v = std::stod(cells[i], &used);
    if (used != cells[i].size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line_no) + ": '" + cells[i] + "' is not a number");
  }
}

int csv_int(const std::vector<std::string>& cells, std::size_t i, int line_no) {
  auto v = csv_number(cells, i, line_no);
  if (!v || std::floor(*v) != *v)
    throw InputError("line " + std::to_string(line_no) + ": expected integer in column " + std::to_string(i + 1));
  return static_cast<int>(*v);
}

// Builds model + demand from parsed records and validates everything.
LoadedFeeder assemble(double base_mva, double base_kv, double v0, const std::vector<NodeRecord>& nodes,
                      const std::vector<BranchRecord>& branches) {
  std::vector<std::string> problems;
  if (!(base_mva > 0.0) || !finite(base_mva)) problems.push_back("base_mva must be positive");
  if (!(base_kv > 0.0) || !finite(base_kv)) problems.push_back("base_kv must be positive");
  if (!(v0 > 0.0) || !finite(v0)) problems.push_back("v0_pu2 must be positive");
  if (!problems.empty()) throw InputError("invalid feeder", problems);

  // Highest node id referenced anywhere; a branch count that disagrees is
  // reported by the radiality check.
  int max_id = 0;
  for (const auto& rec : nodes) max_id = std::max(max_id, rec.id);
  for (const auto& rec : branches) max_id = std::max({max_id, rec.from, rec.to});
  const std::size_t n = static_cast<std::size_t>(max_id);
  FeederModel feeder;
  feeder.node_count = n;
  feeder.base_mva = base_mva;
  feeder.base_kv = base_kv;
  feeder.v0 = v0;
  feeder.v_min.assign(n, kDefaultVMinPu2);
  feeder.v_max.assign(n, kDefaultVMaxPu2);
  feeder.node_names.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) feeder.node_names[i] = std::to_string(i);

  LoadedFeeder out;
  out.demand = DemandProfile::zeros(n);

  std::set<int> seen;
  for (const auto& rec : nodes) {
    if (rec.id < 0 || static_cast<std::size_t>(rec.id) > n) {
      problems.push_back("node id " + std::to_string(rec.id) + " outside 0.." + std::to_string(n));
      continue;
    }
    if (!seen.insert(rec.id).second) {
      problems.push_back("duplicate node id " + std::to_string(rec.id));
      continue;
    }
    if (!rec.name.empty()) feeder.node_names[static_cast<std::size_t>(rec.id)] = rec.name;
    if (rec.id == 0) {
      bool loaded = (rec.p_load && *rec.p_load != 0.0) || (rec.q_load && *rec.q_load != 0.0) ||
                    (rec.d_plus && *rec.d_plus != 0.0) || (rec.d_minus && *rec.d_minus != 0.0);
      if (loaded) problems.push_back("substation node 0 cannot carry demand");
      continue;
    }
    auto k = static_cast<std::size_t>(rec.id - 1);
    if (rec.v_min) feeder.v_min[k] = *rec.v_min;
    if (rec.v_max) feeder.v_max[k] = *rec.v_max;
    out.demand.p_load[k] = mw_to_pu(rec.p_load.value_or(0.0), base_mva);
    out.demand.q_load[k] = mw_to_pu(rec.q_load.value_or(0.0), base_mva);
    out.demand.d_plus[k] = mw_to_pu(rec.d_plus.value_or(0.0), base_mva);
    out.demand.d_minus[k] = mw_to_pu(rec.d_minus.value_or(0.0), base_mva);
    if (out.demand.d_plus[k] < 0.0 || out.demand.d_minus[k] < 0.0)
      problems.push_back("node " + std::to_string(rec.id) + ": uncertainty bounds must be nonnegative");
    if (!finite(out.demand.p_load[k]) || !finite(out.demand.q_load[k]))
      problems.push_back("node " + std::to_string(rec.id) + ": demand must be finite");
  }

  for (const auto& rec : branches) {
    Branch br{rec.from, rec.to, rec.r, rec.x, 0.0};
    if (!rec.l_max) {
      problems.push_back("branch " + std::to_string(rec.from) + "-" + std::to_string(rec.to) +
                         ": missing l_max_pu2 (no default current limit)");
    } else {
      br.l_max = *rec.l_max;
    }
    feeder.branches.push_back(br);
  }
  if (!problems.empty()) throw InputError("invalid feeder", problems);

  out.feeder = finalize_feeder(std::move(feeder));
  return out;
}

}  // namespace

InputError::InputError(const std::string& message) : std::runtime_error(message), problems_{message} {}

InputError::InputError(const std::string& summary, std::vector<std::string> problems)
    : std::runtime_error(join_problems(summary, problems)), problems_(std::move(problems)) {}

std::string to_string(Direction direction) { return direction == Direction::upper ? "upper" : "lower"; }

Direction direction_from_string(const std::string& text) {
  if (text == "upper") return Direction::upper;
  if (text == "lower") return Direction::lower;
  throw InputError("direction must be 'upper' or 'lower', got '" + text + "'");
}

std::vector<std::vector<int>> FeederModel::children() const {
  std::vector<std::vector<int>> out(node_count + 1);
  for (const auto& b : branches) out[static_cast<std::size_t>(b.from)].push_back(b.to);
  return out;
}

std::vector<int> FeederModel::depth() const {
  std::vector<int> d(node_count + 1, 0);
  for (int node : order) d[static_cast<std::size_t>(node)] = d[static_cast<std::size_t>(parent(node))] + 1;
  return d;
}

std::string FeederModel::name(int node) const {
  if (node >= 0 && static_cast<std::size_t>(node) < node_names.size()) return node_names[static_cast<std::size_t>(node)];
  return std::to_string(node);
}

DemandProfile DemandProfile::zeros(std::size_t node_count) {
  DemandProfile d;
  d.p_load.assign(node_count, 0.0);
  d.q_load.assign(node_count, 0.0);
  d.d_plus.assign(node_count, 0.0);
  d.d_minus.assign(node_count, 0.0);
  return d;
}

double MarketScenario::epsilon_pu() const { return mw_to_pu(epsilon_watts * 1e-6, feeder.base_mva); }

double MarketScenario::capacity(std::size_t m, int node) const {
  const auto& bid = bids[m];
  auto k = static_cast<std::size_t>(node - 1);
  if (direction == Direction::upper) return bid.p_bid[k];
  return bid.offers_lower() ? bid.p_bid_lower[k] : 0.0;
}

std::vector<int> MarketScenario::flexible_nodes() const {
  std::vector<int> out;
  for (int node = 1; node <= static_cast<int>(feeder.node_count); ++node) {
    for (std::size_t m = 0; m < bids.size(); ++m) {
      if (capacity(m, node) > 0.0) {
        out.push_back(node);
        break;
      }
    }
  }
  return out;
}

void MarketScenario::validate() const {
  std::vector<std::string> problems;
  const std::size_t n = feeder.node_count;
  if (bids.empty()) problems.push_back("scenario needs at least one aggregator bid");
  if (!(epsilon_watts > 0.0)) problems.push_back("epsilon must be positive");
  if (demand.p_load.size() != n || demand.q_load.size() != n || demand.d_plus.size() != n ||
      demand.d_minus.size() != n)
    problems.push_back("demand vectors must have one entry per node");
  for (const auto& bid : bids) {
    if (bid.p_bid.size() != n || bid.k.size() != n)
      problems.push_back("bid '" + bid.aggregator_id + "' has wrong dimension");
    if (bid.offers_lower() && bid.p_bid_lower.size() != n)
      problems.push_back("bid '" + bid.aggregator_id + "' lower range has wrong dimension");
  }
  if (!problems.empty()) throw InputError("invalid scenario", problems);
}

double mw_to_pu(double mw, double base_mva) { return mw / base_mva; }
double pu_to_mw(double pu, double base_mva) { return pu * base_mva; }
double price_per_mw_to_per_pu(double price_per_mw, double base_mva) { return price_per_mw * base_mva; }
double price_per_pu_to_per_mw(double price_per_pu, double base_mva) { return price_per_pu / base_mva; }

std::vector<int> validate_radial(std::size_t node_count, const std::vector<Branch>& branches) {
  std::vector<std::string> problems;
  const int n = static_cast<int>(node_count);
  if (branches.size() != node_count) {
    problems.push_back("not radial: " + std::to_string(branches.size()) + " branches for " +
                       std::to_string(node_count) + " non-substation nodes");
  }
  std::vector<std::vector<int>> adj(node_count + 1);
  for (const auto& b : branches) {
    if (b.from < 0 || b.from > n || b.to < 0 || b.to > n) {
      problems.push_back("branch " + std::to_string(b.from) + "-" + std::to_string(b.to) + " references unknown node");
      continue;
    }
    if (b.from == b.to) {
      problems.push_back("not radial: self-loop at node " + std::to_string(b.from));
      continue;
    }
    adj[static_cast<std::size_t>(b.from)].push_back(b.to);
    adj[static_cast<std::size_t>(b.to)].push_back(b.from);
  }
  if (!problems.empty()) throw InputError("not radial", problems);

  // Breadth-first from the substation; revisiting a node means a cycle.
  std::vector<int> parent(node_count + 1, -2);
  std::vector<int> order;
  std::queue<int> frontier;
  parent[0] = -1;
  frontier.push(0);
  bool cycle = false;
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    bool skipped_parent = false;
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (v == parent[static_cast<std::size_t>(u)] && !skipped_parent) {
        skipped_parent = true;
        continue;
      }
      if (parent[static_cast<std::size_t>(v)] != -2) {
        cycle = true;
        continue;
      }
      parent[static_cast<std::size_t>(v)] = u;
      order.push_back(v);
      frontier.push(v);
    }
  }
  if (cycle) problems.push_back("not radial: cycle detected");
  for (int v = 1; v <= n; ++v) {
    if (parent[static_cast<std::size_t>(v)] == -2)
      problems.push_back("node " + std::to_string(v) + " is disconnected from the substation");
  }
  if (!problems.empty()) throw InputError("not radial", problems);
  return order;
}

std::vector<int> validate_radial(const FeederModel& feeder) {
  return validate_radial(feeder.node_count, feeder.branches);
}

FeederModel finalize_feeder(FeederModel feeder) {
  const std::size_t n = feeder.node_count;
  auto order = validate_radial(n, feeder.branches);

  std::vector<int> parent(n + 1, -1);
  {
    std::vector<std::vector<int>> adj(n + 1);
    for (const auto& b : feeder.branches) {
      adj[static_cast<std::size_t>(b.from)].push_back(b.to);
      adj[static_cast<std::size_t>(b.to)].push_back(b.from);
    }
    std::vector<bool> seen(n + 1, false);
    seen[0] = true;
    std::queue<int> q;
    q.push(0);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (seen[static_cast<std::size_t>(v)]) continue;
        seen[static_cast<std::size_t>(v)] = true;
        parent[static_cast<std::size_t>(v)] = u;
        q.push(v);
      }
    }
  }

  std::vector<Branch> sorted(n);
  for (auto b : feeder.branches) {
    if (parent[static_cast<std::size_t>(b.to)] != b.from) std::swap(b.from, b.to);
    sorted[static_cast<std::size_t>(b.to - 1)] = b;
  }
  feeder.branches = std::move(sorted);
  feeder.order = std::move(order);

  std::vector<std::string> problems;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& b = feeder.branches[k];
    std::string tag = "branch " + std::to_string(b.from) + "-" + std::to_string(b.to);
    if (!finite(b.r) || !finite(b.x)) problems.push_back(tag + ": impedance must be finite");
    if (b.r < 0.0) problems.push_back(tag + ": resistance must be nonnegative");
    if (b.r == 0.0 && b.x == 0.0) problems.push_back(tag + ": zero impedance");
    if (!(b.l_max > 0.0)) problems.push_back(tag + ": l_max must be positive");
  }
  if (feeder.v_min.size() != n || feeder.v_max.size() != n) {
    problems.push_back("voltage limit vectors must have one entry per node");
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      if (!(feeder.v_min[k] < feeder.v_max[k]) || !(feeder.v_min[k] > 0.0))
        problems.push_back("node " + std::to_string(k + 1) + ": need 0 < v_min < v_max");
    }
    if (n > 0) {
      double lo = *std::min_element(feeder.v_min.begin(), feeder.v_min.end());
      double hi = *std::max_element(feeder.v_max.begin(), feeder.v_max.end());
      if (feeder.v0 < lo || feeder.v0 > hi) problems.push_back("v0 outside the nodal voltage limits");
    }
  }
  if (feeder.node_names.size() != n + 1) {
    feeder.node_names.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
      if (feeder.node_names[i].empty()) feeder.node_names[i] = std::to_string(i);
  }
  if (!problems.empty()) throw InputError("invalid feeder", problems);
  return feeder;
}

FileFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".csv") return FileFormat::csv;
  return FileFormat::json;
}

LoadedFeeder parse_feeder_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("feeder JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("feeder JSON must be an object");
  double base_mva = required_number(doc, "base_mva", "feeder");
  double base_kv = required_number(doc, "base_kv", "feeder");
  double v0 = optional_number(doc, "v0_pu2").value_or(1.0);

  std::vector<NodeRecord> nodes;
  if (auto it = doc.find("nodes"); it != doc.end()) {
    if (!it->is_array()) throw InputError("'nodes' must be an array");
    for (const auto& j : *it) nodes.push_back(node_from_json(j));
  }
  auto it = doc.find("branches");
  if (it == doc.end() || !it->is_array()) throw InputError("feeder JSON needs a 'branches' array");
  std::vector<BranchRecord> branches;
  for (const auto& j : *it) {
    BranchRecord rec;
    rec.from = required_int(j, "from", "branch record");
    rec.to = required_int(j, "to", "branch record");
    rec.r = required_number(j, "r_pu", "branch record");
    rec.x = required_number(j, "x_pu", "branch record");
    rec.l_max = optional_number(j, "l_max_pu2");
    branches.push_back(rec);
  }
  return assemble(base_mva, base_kv, v0, nodes, branches);
}

// CSV layout, one record per line, '#' starts a comment:
//   base,<base_mva>,<base_kv>,<v0_pu2>
//   node,<id>,<v_min_pu2>,<v_max_pu2>,<p_load_mw>,<q_load_mvar>,<d_plus_mw>,<d_minus_mw>[,<name>]
//   branch,<from>,<to>,<r_pu>,<x_pu>,<l_max_pu2>
LoadedFeeder parse_feeder_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::optional<double> base_mva, base_kv, v0;
  std::vector<NodeRecord> nodes;
  std::vector<BranchRecord> branches;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    const auto& kind = cells[0];
    if (kind == "record") continue;  // optional header line
    if (kind == "base") {
      base_mva = csv_number(cells, 1, line_no);
      base_kv = csv_number(cells, 2, line_no);
      v0 = csv_number(cells, 3, line_no);
    } else if (kind == "node") {
      NodeRecord rec;
      rec.id = csv_int(cells, 1, line_no);
      rec.v_min = csv_number(cells, 2, line_no);
      rec.v_max = csv_number(cells, 3, line_no);
      rec.p_load = csv_number(cells, 4, line_no);
      rec.q_load = csv_number(cells, 5, line_no);
      rec.d_plus = csv_number(cells, 6, line_no);
      rec.d_minus = csv_number(cells, 7, line_no);
      if (cells.size() > 8) rec.name = cells[8];
      nodes.push_back(rec);
    } else if (kind == "branch") {
      BranchRecord rec;
      rec.from = csv_int(cells, 1, line_no);
      rec.to = csv_int(cells, 2, line_no);
      auto r = csv_number(cells, 3, line_no);
      auto x = csv_number(cells, 4, line_no);
      if (!r || !x) throw InputError("line " + std::to_string(line_no) + ": branch needs r_pu and x_pu");
      rec.r = *r;
      rec.x = *x;
      rec.l_max = csv_number(cells, 5, line_no);
      branches.push_back(rec);
    } else {
      throw InputError("line " + std::to_string(line_no) + ": unknown record type '" + kind + "'");
    }
  }
  if (!base_mva || !base_kv) throw InputError("feeder CSV needs a 'base' record");
  return assemble(*base_mva, *base_kv, v0.value_or(1.0), nodes, branches);
}

LoadedFeeder load_feeder_file(const std::filesystem::path& path, std::optional<FileFormat> format) {
  auto text = read_file(path);
  auto fmt = format.value_or(format_from_path(path));
  return fmt == FileFormat::csv ? parse_feeder_csv(text) : parse_feeder_json(text);
}

FeederModel load_feeder(const std::filesystem::path& path, std::optional<FileFormat> format) {
  return load_feeder_file(path, format).feeder;
}

DemandProfile load_demand(const std::filesystem::path& path, const FeederModel& feeder) {
  auto text = read_file(path);
  std::vector<NodeRecord> nodes;
  if (format_from_path(path) == FileFormat::csv) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto cells = split_csv_line(line);
      if (cells[0] != "node") continue;
      NodeRecord rec;
      rec.id = csv_int(cells, 1, line_no);
      rec.p_load = csv_number(cells, 4, line_no);
      rec.q_load = csv_number(cells, 5, line_no);
      rec.d_plus = csv_number(cells, 6, line_no);
      rec.d_minus = csv_number(cells, 7, line_no);
      nodes.push_back(rec);
    }
  } else {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw InputError(std::string("demand JSON parse error: ") + e.what());
    }
    auto it = doc.find("nodes");
    if (it == doc.end() || !it->is_array()) throw InputError("demand JSON needs a 'nodes' array");
    for (const auto& j : *it) nodes.push_back(node_from_json(j));
  }
  auto demand = DemandProfile::zeros(feeder.node_count);
  std::vector<std::string> problems;
  for (const auto& rec : nodes) {
    if (rec.id < 1 || static_cast<std::size_t>(rec.id) > feeder.node_count) {
      problems.push_back("demand references unknown node " + std::to_string(rec.id));
      continue;
    }
    auto k = static_cast<std::size_t>(rec.id - 1);
    demand.p_load[k] = mw_to_pu(rec.p_load.value_or(0.0), feeder.base_mva);
    demand.q_load[k] = mw_to_pu(rec.q_load.value_or(0.0), feeder.base_mva);
    demand.d_plus[k] = mw_to_pu(rec.d_plus.value_or(0.0), feeder.base_mva);
    demand.d_minus[k] = mw_to_pu(rec.d_minus.value_or(0.0), feeder.base_mva);
    if (demand.d_plus[k] < 0.0 || demand.d_minus[k] < 0.0)
      problems.push_back("node " + std::to_string(rec.id) + ": uncertainty bounds must be nonnegative");
  }
  if (!problems.empty()) throw InputError("invalid demand", problems);
  return demand;
}

namespace {

struct BidEntry {
  std::string aggregator;
  int node = 0;
  double p_bid_mw = 0.0;
  double k_per_mw = 0.0;
  std::optional<double> p_bid_lower_mw;
};

std::vector<AggregatorBid> assemble_bids(const std::vector<std::string>& ids, const std::vector<BidEntry>& entries,
                                         const FeederModel& feeder) {
  std::vector<std::string> problems;
  const std::size_t n = feeder.node_count;
  std::map<std::string, std::size_t> index;
  std::vector<AggregatorBid> bids;
  for (const auto& id : ids) {
    if (index.count(id)) {
      problems.push_back("duplicate aggregator id '" + id + "'");
      continue;
    }
    index[id] = bids.size();
    AggregatorBid bid;
    bid.aggregator_id = id;
    bid.p_bid.assign(n, 0.0);
    bid.k.assign(n, 0.0);
    bids.push_back(std::move(bid));
  }
  std::set<std::pair<std::string, int>> seen;
  for (const auto& e : entries) {
    std::string tag = "aggregator '" + e.aggregator + "' node " + std::to_string(e.node);
    if (e.node < 1 || static_cast<std::size_t>(e.node) > n) {
      problems.push_back(tag + ": unknown node (feeder has nodes 1.." + std::to_string(n) + ")");
      continue;
    }
    if (!seen.insert({e.aggregator, e.node}).second) {
      problems.push_back(tag + ": duplicate entry");
      continue;
    }
    if (!(e.p_bid_mw >= 0.0) || !finite(e.p_bid_mw)) problems.push_back(tag + ": negative capacity");
    if (!(e.k_per_mw >= 0.0) || !finite(e.k_per_mw)) problems.push_back(tag + ": negative price");
    if (e.p_bid_lower_mw && !(*e.p_bid_lower_mw >= 0.0)) problems.push_back(tag + ": negative lower capacity");
    auto& bid = bids[index.at(e.aggregator)];
    auto k = static_cast<std::size_t>(e.node - 1);
    bid.p_bid[k] = mw_to_pu(e.p_bid_mw, feeder.base_mva);
    bid.k[k] = e.k_per_mw;
    if (e.p_bid_lower_mw) {
      if (!bid.offers_lower()) bid.p_bid_lower.assign(n, 0.0);
      bid.p_bid_lower[k] = mw_to_pu(*e.p_bid_lower_mw, feeder.base_mva);
    }
  }
  if (bids.empty()) problems.push_back("bid file contains no aggregators");
  if (!problems.empty()) throw InputError("invalid bids", problems);
  return bids;
}

}  // namespace

std::vector<AggregatorBid> parse_bids_json(const std::string& text, const FeederModel& feeder) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("bids JSON parse error: ") + e.what());
  }
  auto it = doc.find("aggregators");
  if (it == doc.end() || !it->is_array()) throw InputError("bids JSON needs an 'aggregators' array");
  std::vector<std::string> ids;
  std::vector<BidEntry> entries;
  for (const auto& agg : *it) {
    auto id_it = agg.find("id");
    if (id_it == agg.end()) throw InputError("aggregator record without 'id'");
    std::string id = id_it->is_string() ? id_it->get<std::string>() : id_it->dump();
    ids.push_back(id);
    auto nodal = agg.find("nodal");
    if (nodal == agg.end() || !nodal->is_array()) throw InputError("aggregator '" + id + "' needs a 'nodal' array");
    for (const auto& j : *nodal) {
      BidEntry e;
      e.aggregator = id;
      e.node = required_int(j, "node", "bid entry");
      e.p_bid_mw = required_number(j, "p_bid_mw", "bid entry");
      // Prices may be quoted per kW (demand-charge convention); stored per MW.
      if (auto kw = optional_number(j, "k_per_kw")) {
        e.k_per_mw = *kw * 1000.0;
      } else {
        e.k_per_mw = required_number(j, "k_per_mw", "bid entry");
      }
      e.p_bid_lower_mw = optional_number(j, "p_bid_lower_mw");
      entries.push_back(e);
    }
  }
  return assemble_bids(ids, entries, feeder);
}

// CSV: header optional; rows are aggregator_id,node,p_bid_mw,k_per_mw[,p_bid_lower_mw]
std::vector<AggregatorBid> parse_bids_csv(const std::string& text, const FeederModel& feeder) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> ids;
  std::vector<BidEntry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (cells[0] == "aggregator_id") continue;
    if (cells.size() < 4) throw InputError("line " + std::to_string(line_no) + ": expected 4 or 5 columns");
    BidEntry e;
    e.aggregator = cells[0];
    e.node = csv_int(cells, 1, line_no);
    e.p_bid_mw = csv_number(cells, 2, line_no).value_or(0.0);
    e.k_per_mw = csv_number(cells, 3, line_no).value_or(0.0);
    e.p_bid_lower_mw = csv_number(cells, 4, line_no);
    if (std::find(ids.begin(), ids.end(), e.aggregator) == ids.end()) ids.push_back(e.aggregator);
    entries.push_back(e);
  }
  return assemble_bids(ids, entries, feeder);
}

std::vector<AggregatorBid> load_bids(const std::filesystem::path& path, const FeederModel& feeder) {
  auto text = read_file(path);
  return format_from_path(path) == FileFormat::csv ? parse_bids_csv(text, feeder) : parse_bids_json(text, feeder);
}

}  // namespace gridmarket
