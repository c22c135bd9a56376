#include <benchmark/benchmark.h>

#include "sta/attention.hpp"
#include "sta/dataset.hpp"
#include "sta/graph.hpp"
#include "sta/rng.hpp"

namespace {

sta::Matrix gaussian(std::size_t rows, std::size_t cols, sta::Rng& rng) {
  sta::Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

struct Fixture {
  sta::Graph g;
  sta::Matrix q, k, v;
};

Fixture make(std::size_t n, std::size_t degree, std::size_t dim) {
  sta::Rng rng(42);
  Fixture f;
  f.g = sta::random_gnm_graph(n, n * degree / 2, rng);
  f.q = gaussian(n, dim, rng);
  f.k = gaussian(n, dim, rng);
  f.v = gaussian(n, dim, rng);
  return f;
}

// args: N, average degree, K, d
void BM_StaEfficient(benchmark::State& state) {
  const auto f = make(state.range(0), state.range(1), state.range(3));
  sta::StaWorkspace ws;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sta::sta_all_hops_efficient(f.g, state.range(2), f.q, f.k, f.v, ws));
  }
  state.counters["E"] = static_cast<double>(f.g.num_edges());
}
BENCHMARK(BM_StaEfficient)
    ->Args({4096, 16, 4, 32})
    ->Args({4096, 32, 4, 32})
    ->Args({512, 16, 4, 32})
    ->Args({1024, 16, 4, 32})
    ->Unit(benchmark::kMillisecond);

void BM_StaDenseOracle(benchmark::State& state) {
  const auto f = make(state.range(0), state.range(1), state.range(3));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sta::sta_k_dense_oracle(f.g, state.range(2), f.q, f.k, f.v));
  }
}
BENCHMARK(BM_StaDenseOracle)->Args({256, 16, 4, 32})->Args({512, 16, 4, 32})->Unit(benchmark::kMillisecond);

void BM_GlobalSa(benchmark::State& state) {
  const auto f = make(state.range(0), 8, 32);
  for (auto _ : state) benchmark::DoNotOptimize(sta::global_sa(f.q, f.k, f.v));
}
BENCHMARK(BM_GlobalSa)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_Propagate(benchmark::State& state) {
  const auto f = make(state.range(0), state.range(1), 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sta::propagate(f.g, sta::TransitionKind::RandomWalk, f.v));
  }
}
BENCHMARK(BM_Propagate)->Args({4096, 16})->Args({4096, 32})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
