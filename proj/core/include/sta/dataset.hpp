#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sta/graph.hpp"
#include "sta/matrix.hpp"
#include "sta/rng.hpp"

namespace sta {

struct Dataset {
  std::string name;
  Graph graph;
  Matrix features;                         // N x f
  std::vector<int> labels;                 // dense in [0, num_classes)
  std::size_t num_classes = 0;
  std::vector<std::int64_t> label_values;  // original label of each dense id

  std::size_t num_nodes() const { return graph.num_nodes(); }
  // Throws unless feature rows, label count and node count agree.
  void validate() const;
};

// "u v" per line, separated by whitespace or a comma; '#' starts a comment.
std::vector<Edge> parse_edge_list(std::istream& in, const std::string& source = "edges");
// One row per node. The first line is a header when its first cell is not numeric.
Matrix parse_features_csv(std::istream& in, const std::string& source = "features");
// One integer per line; blank lines are ignored.
std::vector<std::int64_t> parse_labels(std::istream& in, const std::string& source = "labels");

// Maps sorted distinct values to 0..C-1; `values` receives the original of each id.
std::vector<int> remap_labels(const std::vector<std::int64_t>& raw, std::vector<std::int64_t>& values);

// Node count is taken from the feature file. I/O failures raise ErrorKind::Io,
// malformed content raises ErrorKind::Validation with the line number.
Dataset load_dataset(const std::filesystem::path& edges, const std::filesystem::path& features,
                     const std::filesystem::path& labels);

void write_edge_list(std::ostream& out, const Graph& g);
void write_features_csv(std::ostream& out, const Matrix& x);
void write_labels(std::ostream& out, const std::vector<int>& labels);
void save_dataset(const Dataset& d, const std::filesystem::path& edges, const std::filesystem::path& features,
                  const std::filesystem::path& labels);

struct SbmOptions {
  std::size_t blocks = 2;
  std::size_t per_block = 200;
  double p_in = 0.05;
  double p_out = 0.005;
  double signal = 3.0;
  std::uint64_t seed = 0;
  friend bool operator==(const SbmOptions&, const SbmOptions&) = default;
};

inline constexpr std::size_t kSbmMaxAttempts = 100;

// Stochastic block model. Features are the one-hot block indicator plus
// N(0, 1) / signal noise; labels are block ids. Resampled until connected.
Dataset synth_sbm(const SbmOptions& opts);

// Uniform random tree over n nodes plus each remaining pair independently with
// probability p. Connected by construction.
Graph random_connected_graph(std::size_t n, double p, Rng& rng);

// m distinct uniformly random edges (no self-loops) over n nodes.
Graph random_gnm_graph(std::size_t n, std::size_t m, Rng& rng);

}  // namespace sta
