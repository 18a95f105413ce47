#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridmarket {

/// Raised for malformed or inconsistent input data (bad files, non-radial
/// topology, out-of-range limits). Carries every problem found, not just the
/// first one.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& message);
  InputError(const std::string& summary, std::vector<std::string> problems);

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Default squared-voltage limits used when a feeder file omits them.
inline constexpr double kDefaultVMinPu2 = 0.95 * 0.95;
inline constexpr double kDefaultVMaxPu2 = 1.05 * 1.05;

/// One line segment of the feeder in per-unit. `from` is the parent
/// (substation side) and `to` the child once the feeder has been validated.
struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double l_max = 0.0;  // squared current limit, p.u.^2

  double z_squared() const { return r * r + x * x; }
};

enum class Direction { upper, lower };

std::string to_string(Direction direction);
Direction direction_from_string(const std::string& text);

/// Radial feeder in per-unit. Node 0 is the substation; nodes 1..N carry
/// demand. After validation, `branches[k]` is the branch whose child is node
/// k + 1, so branch and child-node indices coincide.
struct FeederModel {
  std::size_t node_count = 0;
  std::vector<Branch> branches;
  double v0 = 1.0;  // substation squared voltage, p.u.^2
  std::vector<double> v_min;  // per node 1..N, p.u.^2
  std::vector<double> v_max;
  double base_mva = 1.0;
  double base_kv = 1.0;
  std::vector<std::string> node_names;  // index 0 is the substation
  std::vector<int> order;  // root-to-leaf order of nodes 1..N

  /// Parent of node `node` (1..N).
  int parent(int node) const { return branches[static_cast<std::size_t>(node - 1)].from; }
  const Branch& branch_into(int node) const { return branches[static_cast<std::size_t>(node - 1)]; }
  std::vector<std::vector<int>> children() const;
  /// Number of branches between node and the substation.
  std::vector<int> depth() const;
  std::string name(int node) const;
};

/// Background demand and its robust uncertainty bounds, per node 1..N (p.u.).
struct DemandProfile {
  std::vector<double> p_load;
  std::vector<double> q_load;
  std::vector<double> d_plus;
  std::vector<double> d_minus;

  static DemandProfile zeros(std::size_t node_count);
};

/// One Aggregator's nodal offers in per-unit power and $/MW prices.
struct AggregatorBid {
  std::string aggregator_id;
  std::vector<double> p_bid;        // upper-range capacity, p.u.
  std::vector<double> k;            // $/MW
  std::vector<double> p_bid_lower;  // lower-range capacity, p.u.; empty when not offered

  bool offers_lower() const { return !p_bid_lower.empty(); }
};

struct MarketScenario {
  FeederModel feeder;
  DemandProfile demand;
  std::vector<AggregatorBid> bids;
  Direction direction = Direction::upper;
  double epsilon_watts = 10.0;
  bool robust = false;

  double epsilon_pu() const;
  /// Nodes (1..N) where any Aggregator offers capacity in `direction`.
  std::vector<int> flexible_nodes() const;
  /// Bid capacity of aggregator m at node (1..N) in the scenario direction.
  double capacity(std::size_t m, int node) const;
  void validate() const;
};

// Per-unit conversions at the I/O boundary.
double mw_to_pu(double mw, double base_mva);
double pu_to_mw(double pu, double base_mva);
double price_per_mw_to_per_pu(double price_per_mw, double base_mva);
double price_per_pu_to_per_mw(double price_per_pu, double base_mva);

/// Returns a root-to-leaf ordering of nodes 1..N. Throws InputError when the
/// branch list is not a spanning tree rooted at node 0.
std::vector<int> validate_radial(std::size_t node_count, const std::vector<Branch>& branches);
std::vector<int> validate_radial(const FeederModel& feeder);

/// Re-orients branches parent->child, sorts them by child node, runs every
/// FeederModel invariant check and fills `order`. Throws InputError.
FeederModel finalize_feeder(FeederModel feeder);

enum class FileFormat { json, csv };
FileFormat format_from_path(const std::filesystem::path& path);

struct LoadedFeeder {
  FeederModel feeder;
  DemandProfile demand;
};

/// Loads a feeder (with any embedded nodal demand) from JSON or CSV.
LoadedFeeder load_feeder_file(const std::filesystem::path& path,
                              std::optional<FileFormat> format = std::nullopt);
FeederModel load_feeder(const std::filesystem::path& path,
                        std::optional<FileFormat> format = std::nullopt);
LoadedFeeder parse_feeder_json(const std::string& text);
LoadedFeeder parse_feeder_csv(const std::string& text);

/// Demand-only file: same node records as the feeder schema.
DemandProfile load_demand(const std::filesystem::path& path, const FeederModel& feeder);

std::vector<AggregatorBid> load_bids(const std::filesystem::path& path, const FeederModel& feeder);
std::vector<AggregatorBid> parse_bids_json(const std::string& text, const FeederModel& feeder);
std::vector<AggregatorBid> parse_bids_csv(const std::string& text, const FeederModel& feeder);

}  // namespace gridmarket
