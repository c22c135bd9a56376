#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sta/attention.hpp"
#include "sta/graph.hpp"
#include "sta/matrix.hpp"

namespace sta {

// Dense analysis below is O(N^3) per step.
inline constexpr std::size_t kMaxTheoryNodes = 512;

// Absolute slack on the asserted L1 bound. Entries of a dense power carry
// rounding error near 1e-16 each, so bounds far below that are unresolvable.
inline constexpr double kBoundRoundingFloor = 1e-13;

struct MixingTimeRow {
  double epsilon = 0.0;
  std::optional<std::size_t> measured;  // smallest k with D(k') <= eps for all k <= k' <= k_max
  std::size_t predicted = 0;            // ceil(log(N / eps) / gap)
  bool within_prediction = false;
};

struct ConvergenceReport {
  std::size_t num_nodes = 0;
  std::size_t k_max = 0;
  double spectral_gap = 0.0;
  std::uint32_t d_max = 0;
  std::uint32_t d_min = 0;
  // Indexed by k = 0..k_max.
  std::vector<double> max_deviation;             // D(k) = max_ij |A^k_ij - pi_i|
  std::vector<std::vector<double>> column_l1;    // ||A^k e_j - pi||_1 for every j
  std::vector<double> max_column_l1;
  std::vector<double> rigorous_bound;            // sqrt(N d_max / d_min) (1 - gap)^k
  std::vector<double> exp_bound;                 // N exp(-k gap)
  std::size_t rigorous_violations = 0;           // (k, j) pairs above the rigorous bound
  std::size_t exp_violations = 0;                // (k, j) pairs above the looser displayed curve
  std::vector<MixingTimeRow> mixing_times;
};

// Powers of the random-walk operator by repeated dense multiplication.
// Throws for disconnected or bipartite graphs and for N > kMaxTheoryNodes.
ConvergenceReport verify_mixing(const Graph& g, std::size_t k_max,
                                std::span<const double> epsilons = std::span<const double>());

struct RatioBandRow {
  double eta = 0.0;
  std::optional<std::size_t> measured;  // smallest k after which every ratio stays in band
  std::size_t predicted = 0;            // ceil(2 log(N / eta) / gap)
  std::size_t violations_after_prediction = 0;  // hops k in [predicted, k_max] out of band
  bool within_prediction = false;
};

struct RatioReport {
  std::size_t num_nodes = 0;
  std::size_t k_max = 0;
  double spectral_gap = 0.0;
  std::size_t entries = 0;   // N * d_v
  std::size_t excluded = 0;  // entries with |SA| <= kRatioExclusionThreshold
  // Indexed by k = 1..k_max (element 0 unused and left at 1).
  std::vector<double> min_ratio;
  std::vector<double> max_ratio;
  std::vector<RatioBandRow> bands;
};

inline constexpr double kRatioExclusionThreshold = 1e-9;

// Elementwise STA_k / SA for k = 1..k_max with single-head dense evaluation.
// V must be entrywise nonnegative.
RatioReport verify_sta_sa_ratio(const Graph& g, const Matrix& q, const Matrix& k, const Matrix& v,
                                std::size_t k_max, std::span<const double> etas,
                                PiWeighting weighting = PiWeighting::PerTarget);

}  // namespace sta
