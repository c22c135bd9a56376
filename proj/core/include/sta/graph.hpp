#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sta/matrix.hpp"

namespace sta {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

enum class TransitionKind {
  RandomWalk,           // A * D^-1, column-stochastic
  SymmetricNormalized,  // D^-1/2 * A * D^-1/2
};

// Immutable undirected graph in CSR form. Both directions of every edge are
// stored, neighbour lists are strictly increasing, and every node has degree
// >= 1 (isolated nodes receive a self-loop at build time).
class Graph {
 public:
  Graph() = default;

  // Symmetrizes and deduplicates `edges`, drops input self-loops, and gives
  // each isolated node a single self-loop (reported by isolated_nodes()).
  static Graph from_edges(std::span<const Edge> edges, std::size_t num_nodes);

  std::size_t num_nodes() const noexcept { return degrees_.size(); }
  // Undirected edge count; a self-loop counts once.
  std::size_t num_edges() const noexcept { return num_edges_; }
  // Stored CSR entries (2|E| minus one per self-loop).
  std::size_t num_entries() const noexcept { return col_indices_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const NodeId> col_indices() const noexcept { return col_indices_; }
  std::span<const std::uint32_t> degrees() const noexcept { return degrees_; }
  std::span<const NodeId> neighbors(NodeId i) const noexcept {
    return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::uint32_t degree(NodeId i) const noexcept { return degrees_[i]; }
  std::uint32_t max_degree() const noexcept;
  std::uint32_t min_degree() const noexcept;

  // Nodes that had no incident edge in the input and were given a self-loop.
  std::span<const NodeId> isolated_nodes() const noexcept { return isolated_; }

  bool has_edge(NodeId i, NodeId j) const noexcept;

  // Relabels node i as perm[i].
  Graph permuted(std::span<const NodeId> perm) const;
  std::vector<Edge> edge_list() const;

 private:
  std::vector<std::size_t> row_offsets_{0};
  std::vector<NodeId> col_indices_;
  std::vector<std::uint32_t> degrees_;
  std::vector<NodeId> isolated_;
  std::size_t num_edges_ = 0;
};

inline Graph build_graph(std::span<const Edge> edges, std::size_t num_nodes) {
  return Graph::from_edges(edges, num_nodes);
}

// out = T * m for the chosen transition T, one pass over all stored entries.
Matrix propagate(const Graph& g, TransitionKind kind, const Matrix& m);
// propagate() into a caller-owned buffer, reused when the shape already fits.
void propagate_into(const Graph& g, TransitionKind kind, const Matrix& m, Matrix& out);
// out = T^T * m; the adjoint used by reverse-mode propagation.
Matrix propagate_transpose(const Graph& g, TransitionKind kind, const Matrix& m);

// pi_i = d(i) / sum_j d(j).
std::vector<double> stationary_distribution(const Graph& g);

// Dense transition matrix; for oracles and small-graph analysis only.
Matrix dense_transition(const Graph& g, TransitionKind kind);

bool is_connected(const Graph& g);
bool is_bipartite(const Graph& g);

}  // namespace sta
