#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "sta/config.hpp"
#include "sta/graph.hpp"

namespace sta {

struct BenchRow {
  std::string path;  // "efficient" or "dense"
  std::string sweep;  // "edges", "nodes" or "hops"
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t hops = 0;
  std::size_t dim = 0;
  double seconds = 0.0;
};

// One discarded warm-up call, then the median wall time of `repeats` calls.
double median_seconds(const std::function<void()>& fn, std::size_t repeats = 5);
// Same, for several functions timed round-robin within each repeat so that
// machine-load drift hits all of them alike. Start order rotates per repeat.
std::vector<double> median_seconds(const std::vector<std::function<void()>>& fns, std::size_t repeats = 5);

// STA_0..STA_hops via nested propagation, single head of width `dim`.
BenchRow time_efficient(const Graph& g, std::size_t hops, std::size_t dim, std::uint64_t seed, std::size_t repeats);
// STA_hops through the dense transition power.
BenchRow time_dense(const Graph& g, std::size_t hops, std::size_t dim, std::uint64_t seed, std::size_t repeats);

// Edge sweep at fixed N (degree d and 2d), node sweep at fixed |E|/N for both
// paths (dense_nodes and 2 * dense_nodes), and a hop sweep 1..hops.
std::vector<BenchRow> run_bench_suite(const BenchOptions& opts, std::uint64_t seed);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace sta
