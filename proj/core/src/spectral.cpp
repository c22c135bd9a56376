#include "sta/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "sta/error.hpp"

namespace sta {

namespace {

Eigen::MatrixXd dense_sym(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n > kMaxSpectralNodes) {
    throw validation_error("spectral: graph has " + std::to_string(n) +
                           " nodes, dense eigendecomposition is limited to " +
                           std::to_string(kMaxSpectralNodes));
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : g.neighbors(i)) {
      a(i, j) = 1.0 / std::sqrt(static_cast<double>(g.degree(i)) * g.degree(j));
    }
  }
  return a;
}

}  // namespace

SpectralInfo spectral_info(const Graph& g) {
  SpectralInfo info;
  info.is_connected = is_connected(g);
  info.is_bipartite = is_bipartite(g);
  const std::size_t n = g.num_nodes();
  if (n == 0) return info;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_sym(g), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw numerical_error("spectral_info: eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  info.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::reverse(info.eigenvalues.begin(), info.eigenvalues.end());

  const double second = n > 1 ? info.eigenvalues[1] : -1.0;
  const double last = std::abs(info.eigenvalues.back());
  info.spectral_gap = 1.0 - std::max(second, last);
  return info;
}

Matrix laplacian_pe(const Graph& g, std::size_t m) {
  const std::size_t n = g.num_nodes();
  if (m >= n) {
    throw validation_error("laplacian_pe: requested " + std::to_string(m) +
                           " eigenvectors but graph has only " + std::to_string(n) + " nodes");
  }
  Eigen::MatrixXd lap = -dense_sym(g);
  lap.diagonal().array() += 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success) throw numerical_error("laplacian_pe: eigensolver failed");

  const Eigen::MatrixXd& vecs = solver.eigenvectors();  // columns, ascending eigenvalues
  Matrix pe(n, m);
  for (std::size_t c = 0; c < m; ++c) {
    const auto col = vecs.col(static_cast<Eigen::Index>(c));
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    const double sign = col(arg) < 0.0 ? -1.0 : 1.0;
    const double norm = col.norm();
    for (std::size_t r = 0; r < n; ++r) pe(r, c) = sign * col(static_cast<Eigen::Index>(r)) / norm;
  }
  return pe;
}

}  // namespace sta
