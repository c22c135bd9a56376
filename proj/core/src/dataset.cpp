#include "sta/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <type_traits>
#include <unordered_set>

#include "sta/error.hpp"

namespace sta {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string where(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line) + ": "; }

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) return false;
  if constexpr (std::is_floating_point_v<T>) return std::isfinite(out);
  return true;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      cells.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return cells;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void Dataset::validate() const {
  const std::size_t n = graph.num_nodes();
  if (features.rows() != n) {
    throw validation_error("dataset: " + std::to_string(features.rows()) + " feature rows but " + std::to_string(n) +
                           " nodes");
  }
  if (labels.size() != n) {
    throw validation_error("dataset: " + std::to_string(labels.size()) + " labels but " + std::to_string(n) + " nodes");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) throw validation_error("dataset: label out of range");
  }
}

std::vector<Edge> parse_edge_list(std::istream& in, const std::string& source) {
  std::vector<Edge> edges;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    std::string cleaned(trim(body));
    if (cleaned.empty()) continue;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream fields(cleaned);
    std::string a, b, extra;
    fields >> a >> b;
    if (b.empty() || (fields >> extra)) {
      throw validation_error(where(source, lineno) + "expected two node ids, got '" + line + "'");
    }
    std::uint64_t u = 0, v = 0;
    if (!parse_number(a, u) || !parse_number(b, v) || u > std::numeric_limits<NodeId>::max() ||
        v > std::numeric_limits<NodeId>::max()) {
      throw validation_error(where(source, lineno) + "invalid node id in '" + line + "'");
    }
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return edges;
}

Matrix parse_features_csv(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::size_t cols = 0, rows = 0;
  std::string line;
  bool first = true;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (first) {
      first = false;
      double probe = 0.0;
      if (!parse_number(cells.front(), probe)) continue;  // header
    }
    if (cols == 0) cols = cells.size();
    if (cells.size() != cols) {
      throw validation_error(where(source, lineno) + "expected " + std::to_string(cols) + " columns, found " +
                             std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double x = 0.0;
      if (!parse_number(cells[c], x)) {
        throw validation_error(where(source, lineno) + "column " + std::to_string(c + 1) + ": '" +
                               std::string(cells[c]) + "' is not a number");
      }
      values.push_back(x);
    }
    ++rows;
  }
  Matrix x(rows, cols);
  std::copy(values.begin(), values.end(), x.data());
  return x;
}

std::vector<std::int64_t> parse_labels(std::istream& in, const std::string& source) {
  std::vector<std::int64_t> labels;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    std::int64_t y = 0;
    if (!parse_number(line, y)) throw validation_error(where(source, lineno) + "'" + line + "' is not an integer");
    labels.push_back(y);
  }
  return labels;
}

std::vector<int> remap_labels(const std::vector<std::int64_t>& raw, std::vector<std::int64_t>& values) {
  values = raw;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<int> dense;
  dense.reserve(raw.size());
  for (std::int64_t y : raw) {
    dense.push_back(static_cast<int>(std::lower_bound(values.begin(), values.end(), y) - values.begin()));
  }
  return dense;
}

Dataset load_dataset(const std::filesystem::path& edges, const std::filesystem::path& features,
                     const std::filesystem::path& labels) {
  Dataset d;
  d.name = features.stem().string();
  {
    auto in = open_input(features);
    d.features = parse_features_csv(in, features.string());
  }
  std::vector<std::int64_t> raw;
  {
    auto in = open_input(labels);
    raw = parse_labels(in, labels.string());
  }
  const std::size_t n = d.features.rows();
  if (raw.size() != n) {
    throw validation_error("dataset: " + std::to_string(n) + " feature rows but " + std::to_string(raw.size()) +
                           " labels");
  }
  d.labels = remap_labels(raw, d.label_values);
  d.num_classes = d.label_values.size();
  {
    auto in = open_input(edges);
    const auto list = parse_edge_list(in, edges.string());
    d.graph = Graph::from_edges(list, n);
  }
  d.validate();
  return d;
}

void write_edge_list(std::ostream& out, const Graph& g) {
  for (const auto& [u, v] : g.edge_list()) out << u << ' ' << v << '\n';
}

void write_features_csv(std::ostream& out, const Matrix& x) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out << (j ? "," : "") << x(i, j);
    out << '\n';
  }
}

void write_labels(std::ostream& out, const std::vector<int>& labels) {
  for (int y : labels) out << y << '\n';
}

void save_dataset(const Dataset& d, const std::filesystem::path& edges, const std::filesystem::path& features,
                  const std::filesystem::path& labels) {
  auto e = open_output(edges);
  write_edge_list(e, d.graph);
  auto f = open_output(features);
  write_features_csv(f, d.features);
  auto l = open_output(labels);
  write_labels(l, d.labels);
  if (!e || !f || !l) throw io_error("failed writing dataset files");
}

Dataset synth_sbm(const SbmOptions& o) {
  if (o.blocks == 0 || o.per_block == 0) throw validation_error("synth_sbm: blocks and per_block must be positive");
  if (!(o.p_in >= 0.0 && o.p_in <= 1.0 && o.p_out >= 0.0 && o.p_out <= 1.0)) {
    throw validation_error("synth_sbm: probabilities must lie in [0, 1]");
  }
  if (!(o.signal > 0.0)) throw validation_error("synth_sbm: signal must be positive");
  const std::size_t n = o.blocks * o.per_block;

  for (std::size_t attempt = 0; attempt < kSbmMaxAttempts; ++attempt) {
    Rng rng = Rng::derive(o.seed, attempt);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double p = i / o.per_block == j / o.per_block ? o.p_in : o.p_out;
        if (rng.bernoulli(p)) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    }
    Graph g = Graph::from_edges(edges, n);
    if (!g.isolated_nodes().empty() || !is_connected(g)) continue;

    Dataset d;
    d.name = "sbm";
    d.graph = std::move(g);
    d.num_classes = o.blocks;
    d.features = Matrix(n, o.blocks);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t block = i / o.per_block;
      d.labels.push_back(static_cast<int>(block));
      for (std::size_t c = 0; c < o.blocks; ++c) d.features(i, c) = (c == block ? 1.0 : 0.0) + rng.normal() / o.signal;
    }
    for (std::size_t b = 0; b < o.blocks; ++b) d.label_values.push_back(static_cast<std::int64_t>(b));
    return d;
  }
  throw validation_error("synth_sbm: no connected sample in " + std::to_string(kSbmMaxAttempts) + " attempts");
}

Graph random_connected_graph(std::size_t n, double p, Rng& rng) {
  if (n == 0) throw validation_error("random_connected_graph: n must be positive");
  std::vector<NodeId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
  rng.shuffle(std::span<NodeId>(order));
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(order[i], order[rng.below(i)]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  return Graph::from_edges(edges, n);
}

Graph random_gnm_graph(std::size_t n, std::size_t m, Rng& rng) {
  if (n < 2 || m > n * (n - 1) / 2) throw validation_error("random_gnm_graph: too many edges for " + std::to_string(n) + " nodes");
  std::unordered_set<std::uint64_t> seen;
  std::vector<Edge> edges;
  edges.reserve(m);
  while (edges.size() < m) {
    auto u = rng.below(n), v = rng.below(n);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (seen.insert(u * n + v).second) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return Graph::from_edges(edges, n);
}

}  // namespace sta
