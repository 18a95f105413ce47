#include "gridmarket/network_matrices.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace gridmarket {

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sign_split(const Eigen::MatrixXd& m) {
  return {m.cwiseMax(0.0), m.cwiseMin(0.0)};
}

NetworkMatrices build_matrices(const FeederModel& feeder, const std::vector<int>& order) {
  const auto n = static_cast<Eigen::Index>(feeder.node_count);
  if (order.size() != feeder.node_count || feeder.branches.size() != feeder.node_count)
    throw std::logic_error("build_matrices: order/branch count does not match node count");

  NetworkMatrices m;
  m.B = Eigen::MatrixXd::Zero(n + 1, n);
  m.A = Eigen::MatrixXd::Zero(n, n);
  m.R.resize(n);
  m.X.resize(n);
  m.Z2.resize(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& br = feeder.branches[static_cast<std::size_t>(c)];
    if (br.to != c + 1) throw std::logic_error("build_matrices: branch indexing does not follow child nodes");
    m.B(br.from, c) = 1.0;
    m.B(br.to, c) = 1.0;
    if (br.from > 0) m.A(br.from - 1, c) = 1.0;
    m.R(c) = br.r;
    m.X(c) = br.x;
    m.Z2(c) = br.z_squared();
  }

  // (I - A) C = I  =>  row b of C = e_b + sum of rows of b's children.
  m.C = Eigen::MatrixXd::Identity(n, n);
  std::vector<bool> done(feeder.node_count + 1, false);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int node = *it;
    const Eigen::Index b = node - 1;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (m.A(b, c) != 0.0) {
        if (!done[static_cast<std::size_t>(c + 1)])
          throw std::logic_error("build_matrices: order is not root-to-leaf");
        m.C.row(b) += m.C.row(c);
      }
    }
    done[static_cast<std::size_t>(node)] = true;
  }

  m.DR = m.C * m.A * m.R.asDiagonal();
  m.DX = m.C * m.A * m.X.asDiagonal();
  const Eigen::MatrixXd Ct = m.C.transpose();
  m.Mp = 2.0 * Ct * m.R.asDiagonal() * m.C;
  m.Mq = 2.0 * Ct * m.X.asDiagonal() * m.C;
  Eigen::MatrixXd inner = 2.0 * (m.R.asDiagonal() * m.DR + m.X.asDiagonal() * m.DX);
  inner.diagonal() += m.Z2;
  m.H = Ct * inner;
  std::tie(m.DX_plus, m.DX_minus) = sign_split(m.DX);
  std::tie(m.H_plus, m.H_minus) = sign_split(m.H);
  return m;
}

NetworkMatrices build_matrices(const FeederModel& feeder) { return build_matrices(feeder, feeder.order); }

namespace {

void write_matrix(const Eigen::MatrixXd& mat, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(12);
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      if (j) out << ',';
      out << mat(i, j);
    }
    out << '\n';
  }
}

}  // namespace

void dump_matrices_csv(const NetworkMatrices& m, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix(m.B, dir / "B.csv");
  write_matrix(m.A, dir / "A.csv");
  write_matrix(m.C, dir / "C.csv");
  write_matrix(m.DR, dir / "D_R.csv");
  write_matrix(m.DX, dir / "D_X.csv");
  write_matrix(m.Mp, dir / "M_p.csv");
  write_matrix(m.Mq, dir / "M_q.csv");
  write_matrix(m.H, dir / "H.csv");
  write_matrix(m.DX_plus, dir / "D_X_plus.csv");
  write_matrix(m.DX_minus, dir / "D_X_minus.csv");
  write_matrix(m.H_plus, dir / "H_plus.csv");
  write_matrix(m.H_minus, dir / "H_minus.csv");
}

}  // namespace gridmarket
