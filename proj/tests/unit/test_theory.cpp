#include <doctest.h>

#include <cmath>

#include "sta/dataset.hpp"
#include "sta/error.hpp"
#include "sta/theory.hpp"
#include "support/oracles.hpp"

using namespace sta;

namespace {

Graph cycle(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(e, n);
}

Matrix positive(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.uniform(0.1, 1.0);
  return m;
}

}  // namespace

TEST_SUITE("theory") {
  TEST_CASE("triangle deviation follows (2/3)(1/2)^k") {
    const double eps[] = {1e-3};
    const ConvergenceReport r = verify_mixing(cycle(3), 40, eps);
    CHECK(r.spectral_gap == doctest::Approx(0.5).epsilon(1e-12));
    for (std::size_t k = 0; k <= 40; ++k) {
      CHECK(std::abs(r.max_deviation[k] - (2.0 / 3.0) * std::pow(0.5, static_cast<double>(k))) < 1e-12);
    }
    CHECK(r.rigorous_violations == 0);
    // (2/3)(1/2)^k <= 1e-3 first at k = 10
    REQUIRE(r.mixing_times[0].measured.has_value());
    CHECK(*r.mixing_times[0].measured == 10);
    CHECK(r.mixing_times[0].predicted == static_cast<std::size_t>(std::ceil(std::log(3.0 / 1e-3) / 0.5)));
  }

  TEST_CASE("powers match an independent dense oracle") {
    Rng rng(21);
    const Graph g = random_connected_graph(24, 0.15, rng);
    const ConvergenceReport r = verify_mixing(g, 30);
    const Matrix a = oracle::random_walk(g);
    const auto pi = stationary_distribution(g);
    Matrix p = Matrix::identity(24);
    for (std::size_t k = 0; k <= 30; ++k) {
      double d = 0.0;
      for (std::size_t i = 0; i < 24; ++i)
        for (std::size_t j = 0; j < 24; ++j) d = std::max(d, std::abs(p(i, j) - pi[i]));
      CHECK(std::abs(r.max_deviation[k] - d) < 1e-12);
      p = oracle::multiply(a, p);
    }
  }

  TEST_CASE("rejections") {
    std::vector<Edge> path{{0, 1}};
    CHECK_THROWS_AS((void)verify_mixing(Graph::from_edges(path, 2), 10), Error);
    std::vector<Edge> split{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}};
    CHECK_THROWS_AS((void)verify_mixing(Graph::from_edges(split, 6), 10), Error);
    CHECK_THROWS_AS((void)verify_mixing(cycle(kMaxTheoryNodes + 1), 10), Error);
    CHECK_THROWS_AS((void)verify_mixing(cycle(4), 10), Error);  // bipartite
  }

  TEST_CASE("rigorous bound holds on random graphs") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      Rng rng = Rng::derive(31, s);
      const Graph g = random_connected_graph(32, 0.1, rng);
      if (is_bipartite(g)) continue;
      const ConvergenceReport r = verify_mixing(g, 150);
      CHECK(r.rigorous_violations == 0);
      for (std::size_t k = 0; k <= 150; ++k) CHECK(r.max_column_l1[k] <= r.rigorous_bound[k] + kBoundRoundingFloor);
      for (const auto& row : r.mixing_times) {
        if (row.measured) CHECK(*row.measured <= row.predicted);
      }
    }
  }

  TEST_CASE("constant values give a ratio of exactly one") {
    Rng rng(41);
    const Graph g = random_connected_graph(20, 0.2, rng);
    const Matrix q = oracle::gaussian(20, 3, rng);
    const Matrix k = oracle::gaussian(20, 3, rng);
    const Matrix v(20, 2, 1.0);
    const double etas[] = {1e-9};
    const RatioReport r = verify_sta_sa_ratio(g, q, k, v, 20, etas);
    for (std::size_t h = 1; h <= 20; ++h) {
      CHECK(std::abs(r.min_ratio[h] - 1.0) < 1e-12);
      CHECK(std::abs(r.max_ratio[h] - 1.0) < 1e-12);
    }
    CHECK(r.excluded == 0);
  }

  TEST_CASE("ratio enters the band on an odd cycle and a random graph") {
    Rng rng(43);
    for (const Graph& g : {cycle(15), random_connected_graph(40, 0.1, rng)}) {
      const std::size_t n = g.num_nodes();
      const Matrix q = oracle::gaussian(n, 4, rng, 0.5);
      const Matrix k = oracle::gaussian(n, 4, rng, 0.5);
      const Matrix v = positive(n, 3, rng);
      const double etas[] = {0.3, 0.1};
      const RatioReport r = verify_sta_sa_ratio(g, q, k, v, 400, etas);
      for (const auto& band : r.bands) {
        REQUIRE(band.measured.has_value());
        CHECK(band.violations_after_prediction == 0);
      }
      // the cycle's gap is about 0.022, so (1 - gap)^400 is near 1.5e-4
      CHECK(std::abs(r.max_ratio[400] - 1.0) < 1e-3);
      CHECK(std::abs(r.min_ratio[400] - 1.0) < 1e-3);
    }
  }

  TEST_CASE("per-source stationary weighting does not reach one on irregular graphs") {
    std::vector<Edge> e{{0, 1}, {1, 2}, {2, 0}};
    for (NodeId leaf = 3; leaf < 9; ++leaf) e.emplace_back(0, leaf);
    const Graph g = Graph::from_edges(e, 9);
    Rng rng(47);
    const Matrix q = oracle::gaussian(9, 3, rng);
    const Matrix k = oracle::gaussian(9, 3, rng);
    const Matrix v = positive(9, 2, rng);
    const double etas[] = {0.01};
    const RatioReport target = verify_sta_sa_ratio(g, q, k, v, 300, etas, PiWeighting::PerTarget);
    const RatioReport source = verify_sta_sa_ratio(g, q, k, v, 300, etas, PiWeighting::PerSource);
    CHECK(target.bands[0].measured.has_value());
    CHECK_FALSE(source.bands[0].measured.has_value());
    CHECK(std::max(source.max_ratio[300] - 1.0, 1.0 - source.min_ratio[300]) > 0.05);
  }

  TEST_CASE("negative values are rejected") {
    Rng rng(53);
    const Graph g = cycle(5);
    const Matrix q = oracle::gaussian(5, 2, rng);
    Matrix v(5, 1, 1.0);
    v(2, 0) = -0.5;
    const double etas[] = {0.1};
    CHECK_THROWS_AS((void)verify_sta_sa_ratio(g, q, q, v, 5, etas), Error);
  }
}
