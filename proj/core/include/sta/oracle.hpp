#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sta/config.hpp"

namespace sta {

struct OracleCase {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t hops = 0;
  std::size_t heads = 0;
  double max_deviation = 0.0;  // over every hop and head
};

struct OracleSweepResult {
  std::vector<OracleCase> cases;
  double max_deviation = 0.0;
  bool passed = false;  // max_deviation < tolerance
};

// Case i uses N from {8, 16, 32, 64}, a density from {0.05, 0.1, 0.2, 0.4},
// H from {1, 2, 4} and K in 1..max_hops, all on a graph from stream (seed, i).
// Each hop of sta_all_hops_efficient is compared head by head with
// sta_k_dense_oracle.
OracleSweepResult run_oracle_sweep(const OracleSweep& opts, std::uint64_t seed);

}  // namespace sta
