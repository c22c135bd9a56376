#include "sta/oracle.hpp"

#include <algorithm>

#include "sta/attention.hpp"
#include "sta/dataset.hpp"
#include "sta/rng.hpp"

namespace sta {

namespace {

constexpr std::size_t kNodes[] = {8, 16, 32, 64};
constexpr double kDensity[] = {0.05, 0.1, 0.2, 0.4};
constexpr std::size_t kHeads[] = {1, 2, 4};
constexpr std::size_t kHeadDim = 3;

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

}  // namespace

OracleSweepResult run_oracle_sweep(const OracleSweep& opts, std::uint64_t seed) {
  OracleSweepResult result;
  const std::size_t max_hops = std::max<std::size_t>(opts.max_hops, 1);
  for (std::size_t i = 0; i < opts.graphs; ++i) {
    Rng rng = Rng::derive(seed, i);
    const std::size_t n = kNodes[i % 4];
    const double p = kDensity[(i / 4) % 4];
    const std::size_t heads = kHeads[i % 3];
    const std::size_t hops = 1 + i % max_hops;
    const Graph g = random_connected_graph(n, p, rng);
    const std::size_t width = heads * kHeadDim;
    const Matrix q = gaussian(n, width, rng);
    const Matrix k = gaussian(n, width, rng);
    const Matrix v = gaussian(n, width, rng);

    const auto fast = sta_all_hops_efficient(g, hops, q, k, v, heads);
    OracleCase c{n, g.num_edges(), hops, heads, 0.0};
    for (std::size_t h = 0; h < heads; ++h) {
      const Matrix qh = slice_cols(q, h * kHeadDim, kHeadDim);
      const Matrix kh = slice_cols(k, h * kHeadDim, kHeadDim);
      const Matrix vh = slice_cols(v, h * kHeadDim, kHeadDim);
      for (std::size_t hop = 0; hop <= hops; ++hop) {
        const Matrix dense = sta_k_dense_oracle(g, hop, qh, kh, vh);
        c.max_deviation = std::max(c.max_deviation, max_abs_diff(dense, slice_cols(fast[hop], h * kHeadDim, kHeadDim)));
      }
    }
    result.max_deviation = std::max(result.max_deviation, c.max_deviation);
    result.cases.push_back(c);
  }
  result.passed = result.max_deviation < opts.tolerance;
  return result;
}

}  // namespace sta
