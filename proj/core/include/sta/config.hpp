#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sta/dataset.hpp"
#include "sta/model.hpp"
#include "sta/train.hpp"

namespace sta {

struct DatasetSpec {
  std::string source = "sbm";  // "sbm" or "files"
  std::string edges, features, labels;
  SbmOptions sbm;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct OracleSweep {
  std::size_t graphs = 50;
  std::size_t max_hops = 5;
  double tolerance = 1e-8;
  friend bool operator==(const OracleSweep&, const OracleSweep&) = default;
};

struct TheoremOptions {
  std::size_t nodes = 64;      // generated graph size when no dataset graph is used
  double edge_prob = 0.1;      // extra-edge probability on top of a random tree
  std::size_t k_max = 200;
  std::vector<double> epsilons{1e-2, 1e-4, 1e-6};
  std::vector<double> etas{0.3, 0.1};
  friend bool operator==(const TheoremOptions&, const TheoremOptions&) = default;
};

struct BenchOptions {
  std::size_t nodes = 4096;
  std::size_t degree = 16;     // average degree of the base graph
  std::size_t hops = 4;
  std::size_t dim = 32;
  std::size_t dense_nodes = 512;
  std::size_t repeats = 5;
  friend bool operator==(const BenchOptions&, const BenchOptions&) = default;
};

// Everything a CLI command needs. [run] seed is the single seed: it is copied
// into train.seed and dataset.sbm.seed by set_seed().
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out = "out";
  DatasetSpec dataset;
  ModelConfig model;
  TrainConfig train;
  OracleSweep oracle;
  TheoremOptions theorem;
  BenchOptions bench;

  RunConfig();
  void set_seed(std::uint64_t s);
  // Checks every section; model.in_features / classes are resolved later.
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Sectioned key = value text:
//   [section]
//   key = value   # comment
// Unknown sections or keys, duplicates and malformed values are rejected with
// the line number.
RunConfig parse_run_config(std::string_view text, const std::string& source = "config");
RunConfig load_run_config(const std::filesystem::path& path);
// Every key, in a fixed order; parse(serialize(c)) == c.
std::string serialize_run_config(const RunConfig& cfg);
// FNV-1a over the serialized form.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

const char* to_string(GateMode m);
const char* to_string(Aggregation a);
const char* to_string(Metric m);

}  // namespace sta
