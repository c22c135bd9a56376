#pragma once

#include <cstddef>
#include <vector>

#include "sta/graph.hpp"
#include "sta/matrix.hpp"

namespace sta {

// Dense eigendecomposition is only attempted up to this many nodes.
inline constexpr std::size_t kMaxSpectralNodes = 4000;

struct SpectralInfo {
  std::vector<double> eigenvalues;  // of A_sym, descending
  double spectral_gap = 0.0;        // 1 - max(lambda_2, |lambda_N|)
  bool is_connected = false;
  bool is_bipartite = false;
};

SpectralInfo spectral_info(const Graph& g);

// Eigenvectors of L = I - A_sym for the m smallest eigenvalues, as columns.
// Each column has unit norm and its largest-magnitude entry positive.
Matrix laplacian_pe(const Graph& g, std::size_t m);

}  // namespace sta
