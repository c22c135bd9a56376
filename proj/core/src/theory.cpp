#include "sta/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sta/error.hpp"
#include "sta/spectral.hpp"

namespace sta {

namespace {

constexpr double kDefaultEpsilons[] = {1e-2, 1e-4, 1e-6};

double check_graph(const Graph& g, const char* where) {
  const std::size_t n = g.num_nodes();
  if (n == 0) throw validation_error(std::string(where) + ": empty graph");
  if (n > kMaxTheoryNodes) {
    throw validation_error(std::string(where) + ": " + std::to_string(n) + " nodes exceeds the dense limit of " +
                           std::to_string(kMaxTheoryNodes));
  }
  const SpectralInfo info = spectral_info(g);
  if (!info.is_connected) throw validation_error(std::string(where) + ": graph is disconnected");
  if (info.is_bipartite) throw validation_error(std::string(where) + ": graph is bipartite");
  return info.spectral_gap;
}

std::size_t ceil_count(double x) { return x <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(x)); }

// Smallest k such that ok[k'] holds for every k' in [k, end).
std::optional<std::size_t> settled_from(const std::vector<bool>& ok, std::size_t first) {
  std::optional<std::size_t> from;
  for (std::size_t k = ok.size(); k-- > first;) {
    if (!ok[k]) break;
    from = k;
  }
  return from;
}

}  // namespace

ConvergenceReport verify_mixing(const Graph& g, std::size_t k_max, std::span<const double> epsilons) {
  const double gap = check_graph(g, "verify_mixing");
  if (epsilons.empty()) epsilons = kDefaultEpsilons;
  const std::size_t n = g.num_nodes();
  const auto pi = stationary_distribution(g);

  ConvergenceReport r;
  r.num_nodes = n;
  r.k_max = k_max;
  r.spectral_gap = gap;
  r.d_max = g.max_degree();
  r.d_min = g.min_degree();
  const double scale = std::sqrt(static_cast<double>(n) * r.d_max / r.d_min);

  const Matrix step = dense_transition(g, TransitionKind::RandomWalk);
  Matrix power = Matrix::identity(n);
  for (std::size_t k = 0; k <= k_max; ++k) {
    if (k > 0) power = matmul(power, step);
    double d = 0.0;
    std::vector<double> l1(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double dev = std::abs(power(i, j) - pi[i]);
        d = std::max(d, dev);
        l1[j] += dev;
      }
    }
    const double rigorous = scale * std::pow(1.0 - gap, static_cast<double>(k));
    const double curve = static_cast<double>(n) * std::exp(-static_cast<double>(k) * gap);
    for (double c : l1) {
      r.rigorous_violations += c > rigorous + kBoundRoundingFloor;
      r.exp_violations += c > curve + kBoundRoundingFloor;
    }
    r.max_deviation.push_back(d);
    r.max_column_l1.push_back(*std::max_element(l1.begin(), l1.end()));
    r.column_l1.push_back(std::move(l1));
    r.rigorous_bound.push_back(rigorous);
    r.exp_bound.push_back(curve);
  }

  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw validation_error("verify_mixing: epsilon must be positive");
    std::vector<bool> ok(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) ok[k] = r.max_deviation[k] <= eps;
    MixingTimeRow row;
    row.epsilon = eps;
    row.measured = settled_from(ok, 0);
    row.predicted = ceil_count(std::log(static_cast<double>(n) / eps) / gap);
    row.within_prediction = row.measured && *row.measured <= row.predicted;
    r.mixing_times.push_back(row);
  }
  return r;
}

RatioReport verify_sta_sa_ratio(const Graph& g, const Matrix& q, const Matrix& k, const Matrix& v,
                                std::size_t k_max, std::span<const double> etas, PiWeighting weighting) {
  const double gap = check_graph(g, "verify_sta_sa_ratio");
  const std::size_t n = g.num_nodes();
  if (q.rows() != n || k.rows() != n || v.rows() != n) {
    throw validation_error("verify_sta_sa_ratio: Q, K, V must have one row per node");
  }
  for (double x : v.values()) {
    if (x < 0.0) throw validation_error("verify_sta_sa_ratio: V has a negative entry");
  }
  for (double eta : etas) {
    if (!(eta > 0.0 && eta < 1.0)) throw validation_error("verify_sta_sa_ratio: eta must lie in (0, 1)");
  }

  const Matrix sa = global_sa_pi(g, q, k, v, weighting);
  RatioReport r;
  r.num_nodes = n;
  r.k_max = k_max;
  r.spectral_gap = gap;
  r.entries = sa.size();
  std::vector<bool> kept(sa.size());
  for (std::size_t e = 0; e < sa.size(); ++e) {
    kept[e] = std::abs(sa.values()[e]) > kRatioExclusionThreshold;
    r.excluded += !kept[e];
  }
  if (r.excluded == r.entries) throw numerical_error("verify_sta_sa_ratio: every SA entry is below the threshold");

  r.min_ratio.assign(k_max + 1, 1.0);
  r.max_ratio.assign(k_max + 1, 1.0);
  const Matrix step = dense_transition(g, TransitionKind::RandomWalk);
  Matrix power = Matrix::identity(n);
  for (std::size_t hop = 1; hop <= k_max; ++hop) {
    power = matmul(power, step);
    const Matrix sta = masked_attention_dense(power, q, k, v);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t e = 0; e < sa.size(); ++e) {
      if (!kept[e]) continue;
      const double ratio = sta.values()[e] / sa.values()[e];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    r.min_ratio[hop] = lo;
    r.max_ratio[hop] = hi;
  }

  for (double eta : etas) {
    const double lower = (1.0 - eta) / (1.0 + eta);
    const double upper = (1.0 + eta) / (1.0 - eta);
    std::vector<bool> ok(k_max + 1, false);
    for (std::size_t hop = 1; hop <= k_max; ++hop) ok[hop] = r.min_ratio[hop] >= lower && r.max_ratio[hop] <= upper;
    RatioBandRow row;
    row.eta = eta;
    row.measured = settled_from(ok, 1);
    row.predicted = ceil_count(2.0 * std::log(static_cast<double>(n) / eta) / gap);
    for (std::size_t hop = std::max<std::size_t>(row.predicted, 1); hop <= k_max; ++hop) {
      row.violations_after_prediction += !ok[hop];
    }
    row.within_prediction = row.measured && *row.measured <= row.predicted;
    r.bands.push_back(row);
  }
  return r;
}

}  // namespace sta
