#include "sta/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include "sta/error.hpp"

namespace sta {

Graph Graph::from_edges(std::span<const Edge> edges, std::size_t num_nodes) {
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw validation_error("build_graph: edge (" + std::to_string(u) + ", " +
                             std::to_string(v) + ") out of range for " +
                             std::to_string(num_nodes) + " nodes");
    }
  }

  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2 + num_nodes);
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.degrees_.assign(num_nodes, 0);
  for (const auto& e : directed) ++g.degrees_[e.first];
  for (std::size_t i = 0; i < num_nodes; ++i) {
    if (g.degrees_[i] == 0) {
      g.isolated_.push_back(static_cast<NodeId>(i));
      directed.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(i));
      g.degrees_[i] = 1;
    }
  }
  if (!g.isolated_.empty()) std::sort(directed.begin(), directed.end());

  g.row_offsets_.assign(num_nodes + 1, 0);
  for (std::size_t i = 0; i < num_nodes; ++i) g.row_offsets_[i + 1] = g.row_offsets_[i] + g.degrees_[i];
  g.col_indices_.reserve(directed.size());
  for (const auto& e : directed) g.col_indices_.push_back(e.second);
  g.num_edges_ = (directed.size() - g.isolated_.size()) / 2 + g.isolated_.size();
  return g;
}

std::uint32_t Graph::max_degree() const noexcept {
  return degrees_.empty() ? 0 : *std::max_element(degrees_.begin(), degrees_.end());
}

std::uint32_t Graph::min_degree() const noexcept {
  return degrees_.empty() ? 0 : *std::min_element(degrees_.begin(), degrees_.end());
}

bool Graph::has_edge(NodeId i, NodeId j) const noexcept {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (NodeId i = 0; i < num_nodes(); ++i) {
    for (NodeId j : neighbors(i)) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

Graph Graph::permuted(std::span<const NodeId> perm) const {
  if (perm.size() != num_nodes()) throw validation_error("Graph::permuted: permutation size mismatch");
  auto edges = edge_list();
  for (auto& [u, v] : edges) {
    u = perm[u];
    v = perm[v];
  }
  return from_edges(edges, num_nodes());
}

namespace {

void check_rows(const Graph& g, const Matrix& m, const char* who) {
  if (m.rows() != g.num_nodes()) {
    throw validation_error(std::string(who) + ": matrix has " + std::to_string(m.rows()) +
                           " rows, graph has " + std::to_string(g.num_nodes()) + " nodes");
  }
}

// out_i = w_dst(i) * sum_{j in N(i)} w_src(j) * m_j
void scaled_gather_into(const Graph& g, const Matrix& m, const std::vector<double>& w_src,
                        const std::vector<double>* w_dst, Matrix& out) {
  const std::size_t n = g.num_nodes();
  const std::size_t width = m.cols();
  if (out.rows() != n || out.cols() != width) {
    out = Matrix(n, width);
  } else {
    out.fill(0.0);
  }
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  for (std::size_t i = 0; i < n; ++i) {
    double* dst = out.data() + i * width;
    for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
      const std::size_t j = cols[e];
      const double s = w_src[j];
      const double* src = m.data() + j * width;
      for (std::size_t c = 0; c < width; ++c) dst[c] += s * src[c];
    }
    if (w_dst != nullptr) {
      const double s = (*w_dst)[i];
      for (std::size_t c = 0; c < width; ++c) dst[c] *= s;
    }
  }
}

Matrix scaled_gather(const Graph& g, const Matrix& m, const std::vector<double>& w_src,
                     const std::vector<double>* w_dst) {
  Matrix out;
  scaled_gather_into(g, m, w_src, w_dst, out);
  return out;
}

std::vector<double> degree_power(const Graph& g, double p) {
  std::vector<double> w(g.num_nodes());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(static_cast<double>(g.degree(i)), p);
  return w;
}

}  // namespace

Matrix propagate(const Graph& g, TransitionKind kind, const Matrix& m) {
  check_rows(g, m, "propagate");
  if (kind == TransitionKind::RandomWalk) {
    std::vector<double> inv(g.num_nodes());
    for (std::size_t j = 0; j < inv.size(); ++j) inv[j] = 1.0 / g.degree(j);
    return scaled_gather(g, m, inv, nullptr);
  }
  const auto w = degree_power(g, -0.5);
  return scaled_gather(g, m, w, &w);
}

void propagate_into(const Graph& g, TransitionKind kind, const Matrix& m, Matrix& out) {
  check_rows(g, m, "propagate");
  if (&m == &out) throw validation_error("propagate: output aliases input");
  if (kind == TransitionKind::RandomWalk) {
    std::vector<double> inv(g.num_nodes());
    for (std::size_t j = 0; j < inv.size(); ++j) inv[j] = 1.0 / g.degree(j);
    scaled_gather_into(g, m, inv, nullptr, out);
    return;
  }
  const auto w = degree_power(g, -0.5);
  scaled_gather_into(g, m, w, &w, out);
}

Matrix propagate_transpose(const Graph& g, TransitionKind kind, const Matrix& m) {
  check_rows(g, m, "propagate_transpose");
  if (kind == TransitionKind::RandomWalk) {
    // (A D^-1)^T = D^-1 A
    std::vector<double> ones(g.num_nodes(), 1.0);
    std::vector<double> inv(g.num_nodes());
    for (std::size_t j = 0; j < inv.size(); ++j) inv[j] = 1.0 / g.degree(j);
    return scaled_gather(g, m, ones, &inv);
  }
  return propagate(g, kind, m);
}

std::vector<double> stationary_distribution(const Graph& g) {
  std::vector<double> pi(g.num_nodes());
  double total = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) total += g.degree(i);
  for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = g.degree(i) / total;
  return pi;
}

Matrix dense_transition(const Graph& g, TransitionKind kind) {
  const std::size_t n = g.num_nodes();
  Matrix t(n, n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : g.neighbors(i)) {
      t(i, j) = kind == TransitionKind::RandomWalk
                    ? 1.0 / g.degree(j)
                    : 1.0 / std::sqrt(static_cast<double>(g.degree(i)) * g.degree(j));
    }
  }
  return t;
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return true;
  std::vector<char> seen(n, 0);
  std::deque<NodeId> queue{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++visited;
        queue.push_back(v);
      }
    }
  }
  return visited == n;
}

bool is_bipartite(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<int> color(n, -1);
  for (NodeId s = 0; s < n; ++s) {
    if (color[s] != -1) continue;
    color[s] = 0;
    std::deque<NodeId> queue{s};
    while (!queue.empty()) {
      const NodeId u = queue.front();
      queue.pop_front();
      for (NodeId v : g.neighbors(u)) {
        if (color[v] == -1) {
          color[v] = 1 - color[u];
          queue.push_back(v);
        } else if (color[v] == color[u]) {
          return false;  // includes self-loops
        }
      }
    }
  }
  return true;
}

}  // namespace sta
