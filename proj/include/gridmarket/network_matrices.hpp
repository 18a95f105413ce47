#pragma once

#include <filesystem>
#include <utility>

#include <Eigen/Dense>

#include "gridmarket/feeder.hpp"

namespace gridmarket {

/// Topology and sensitivity matrices of the vectorized DistFlow model. Row
/// and column k (0-based) of every N x N matrix refer to node k + 1 and to
/// the branch feeding it.
///
///   V = v0 1 + Mp p + Mq q - H l,   P = C p - DR l,   Q = C q - DX l
struct NetworkMatrices {
  Eigen::MatrixXd B;   // unsigned incidence, (N+1) x N
  Eigen::MatrixXd A;   // A(b, c) = 1 iff branch c hangs directly below node b
  Eigen::MatrixXd C;   // (I - A)^-1, subtree membership
  Eigen::VectorXd R, X, Z2;
  Eigen::MatrixXd DR, DX;
  Eigen::MatrixXd Mp, Mq, H;
  Eigen::MatrixXd DX_plus, DX_minus;
  Eigen::MatrixXd H_plus, H_minus;

  std::size_t size() const { return static_cast<std::size_t>(C.rows()); }
};

/// Elementwise nonnegative and nonpositive parts; first + second == m.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sign_split(const Eigen::MatrixXd& m);

/// Builds every matrix for a validated feeder. `order` must list nodes 1..N
/// so that each parent precedes its children; C is filled by
/// back-substitution in reverse order.
NetworkMatrices build_matrices(const FeederModel& feeder, const std::vector<int>& order);
NetworkMatrices build_matrices(const FeederModel& feeder);

/// Writes one CSV file per matrix into `dir`.
void dump_matrices_csv(const NetworkMatrices& m, const std::filesystem::path& dir);

}  // namespace gridmarket
