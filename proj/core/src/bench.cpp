#include "sta/bench.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <memory>

#include "sta/attention.hpp"
#include "sta/dataset.hpp"
#include "sta/rng.hpp"

namespace sta {

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

struct Inputs {
  Matrix q, k, v;
};

Inputs make_inputs(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 7);
  Inputs in;
  in.q = gaussian(n, dim, rng);
  in.k = gaussian(n, dim, rng);
  in.v = gaussian(n, dim, rng);
  return in;
}

Graph average_degree_graph(std::size_t n, std::size_t degree, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 11 + degree);
  return random_gnm_graph(n, n * degree / 2, rng);
}

double median(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  return samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
}

}  // namespace

double median_seconds(const std::function<void()>& fn, std::size_t repeats) {
  return median_seconds(std::vector<std::function<void()>>{fn}, repeats).front();
}

std::vector<double> median_seconds(const std::vector<std::function<void()>>& fns, std::size_t repeats) {
  if (repeats == 0) repeats = 1;
  for (const auto& fn : fns) fn();
  std::vector<std::vector<double>> samples(fns.size());
  for (std::size_t r = 0; r < repeats; ++r) {
    for (std::size_t i = 0; i < fns.size(); ++i) {
      const std::size_t f = (r + i) % fns.size();
      const auto start = std::chrono::steady_clock::now();
      fns[f]();
      samples[f].push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
  }
  std::vector<double> out;
  for (auto& s : samples) out.push_back(median(std::move(s)));
  return out;
}

namespace {

struct Timed {
  BenchRow row;
  std::function<void()> fn;
};

Timed efficient_call(const Graph& g, std::size_t hops, std::size_t dim, std::uint64_t seed) {
  auto in = std::make_shared<Inputs>(make_inputs(g.num_nodes(), dim, seed));
  auto ws = std::make_shared<StaWorkspace>();
  return {{"efficient", "", g.num_nodes(), g.num_edges(), hops, dim, 0.0},
          [&g, hops, in, ws] { (void)sta_all_hops_efficient(g, hops, in->q, in->k, in->v, *ws); }};
}

Timed dense_call(const Graph& g, std::size_t hops, std::size_t dim, std::uint64_t seed) {
  auto in = std::make_shared<Inputs>(make_inputs(g.num_nodes(), dim, seed));
  return {{"dense", "", g.num_nodes(), g.num_edges(), hops, dim, 0.0},
          [&g, hops, in] { (void)sta_k_dense_oracle(g, hops, in->q, in->k, in->v); }};
}

std::vector<BenchRow> time_together(std::vector<Timed> calls, std::size_t repeats) {
  std::vector<std::function<void()>> fns;
  for (const auto& c : calls) fns.push_back(c.fn);
  const auto secs = median_seconds(fns, repeats);
  std::vector<BenchRow> rows;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    rows.push_back(calls[i].row);
    rows.back().seconds = secs[i];
  }
  return rows;
}

}  // namespace

BenchRow time_efficient(const Graph& g, std::size_t hops, std::size_t dim, std::uint64_t seed, std::size_t repeats) {
  return time_together({efficient_call(g, hops, dim, seed)}, repeats).front();
}

BenchRow time_dense(const Graph& g, std::size_t hops, std::size_t dim, std::uint64_t seed, std::size_t repeats) {
  return time_together({dense_call(g, hops, dim, seed)}, repeats).front();
}

std::vector<BenchRow> run_bench_suite(const BenchOptions& o, std::uint64_t seed) {
  std::vector<BenchRow> rows;
  auto add = [&](std::vector<BenchRow> batch, const char* sweep) {
    for (auto& r : batch) {
      r.sweep = sweep;
      rows.push_back(std::move(r));
    }
  };

  const Graph base = average_degree_graph(o.nodes, o.degree, seed);
  const Graph doubled = average_degree_graph(o.nodes, 2 * o.degree, seed);
  add(time_together({efficient_call(base, o.hops, o.dim, seed), efficient_call(doubled, o.hops, o.dim, seed)},
                    o.repeats),
      "edges");

  const Graph small = average_degree_graph(o.dense_nodes, o.degree, seed);
  const Graph large = average_degree_graph(2 * o.dense_nodes, o.degree, seed);
  const auto dense = time_together(
      {dense_call(small, o.hops, o.dim, seed), dense_call(large, o.hops, o.dim, seed)}, o.repeats);
  const auto eff = time_together(
      {efficient_call(small, o.hops, o.dim, seed), efficient_call(large, o.hops, o.dim, seed)}, o.repeats);
  add({dense[0], eff[0], dense[1], eff[1]}, "nodes");

  std::vector<Timed> hop_calls;
  for (std::size_t k = 1; k <= o.hops; ++k) hop_calls.push_back(efficient_call(base, k, o.dim, seed));
  add(time_together(std::move(hop_calls), o.repeats), "hops");
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "path,sweep,N,E,K,d,seconds\n";
  out << std::setprecision(9);
  for (const auto& r : rows) {
    out << r.path << ',' << r.sweep << ',' << r.nodes << ',' << r.edges << ',' << r.hops << ',' << r.dim << ','
        << r.seconds << '\n';
  }
}

}  // namespace sta
