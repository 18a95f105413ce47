#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gridmarket/feeder.hpp"

namespace fixtures {

inline std::filesystem::path data_path(const std::string& relative) {
  return std::filesystem::path(GRIDMARKET_DATA_DIR) / relative;
}

/// Feeder from (from, to) pairs with uniform impedance and wide limits.
inline gridmarket::FeederModel make_feeder(const std::vector<std::pair<int, int>>& edges, double r, double x,
                                           double v_min = 0.9025, double v_max = 1.1025, double l_max = 100.0) {
  gridmarket::FeederModel f;
  f.node_count = edges.size();
  for (auto [a, b] : edges) f.branches.push_back({a, b, r, x, l_max});
  f.v_min.assign(f.node_count, v_min);
  f.v_max.assign(f.node_count, v_max);
  return gridmarket::finalize_feeder(f);
}

inline gridmarket::FeederModel two_node(double r, double x, double v_min = 0.9025, double v_max = 1.1025) {
  return make_feeder({{0, 1}}, r, x, v_min, v_max);
}

inline gridmarket::FeederModel path(std::size_t n, double r = 0.02, double x = 0.04) {
  std::vector<std::pair<int, int>> e;
  for (std::size_t k = 1; k <= n; ++k) e.push_back({static_cast<int>(k - 1), static_cast<int>(k)});
  return make_feeder(e, r, x);
}

inline gridmarket::FeederModel star(std::size_t n, double r = 0.02, double x = 0.04) {
  std::vector<std::pair<int, int>> e;
  for (std::size_t k = 1; k <= n; ++k) e.push_back({0, static_cast<int>(k)});
  return make_feeder(e, r, x);
}

/// One aggregator bid with capacities and prices per node (MW, $/MW).
inline gridmarket::AggregatorBid bid(const std::string& id, std::vector<double> p_mw, std::vector<double> k) {
  gridmarket::AggregatorBid b;
  b.aggregator_id = id;
  b.p_bid = std::move(p_mw);
  b.k = std::move(k);
  return b;
}

inline gridmarket::MarketScenario scenario(const std::string& feeder_file, const std::string& bids_file,
                                           gridmarket::Direction d = gridmarket::Direction::upper,
                                           bool robust = false) {
  gridmarket::MarketScenario s;
  auto loaded = gridmarket::load_feeder_file(data_path("feeders/" + feeder_file));
  s.feeder = std::move(loaded.feeder);
  s.demand = std::move(loaded.demand);
  s.bids = gridmarket::load_bids(data_path("bids/" + bids_file), s.feeder);
  s.direction = d;
  s.robust = robust;
  return s;
}

}  // namespace fixtures
