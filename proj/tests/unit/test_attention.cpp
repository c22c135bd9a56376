#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sta/attention.hpp"
#include "sta/dataset.hpp"
#include "sta/error.hpp"
#include "support/oracles.hpp"

using namespace sta;

namespace {

struct Instance {
  Graph g;
  Matrix q, k, v;
};

Instance instance(std::size_t n, std::size_t width, std::uint64_t seed, double p = 0.2) {
  Rng rng(seed);
  Instance in;
  in.g = random_connected_graph(n, p, rng);
  in.q = oracle::gaussian(n, width, rng);
  in.k = oracle::gaussian(n, width, rng);
  in.v = oracle::gaussian(n, width, rng);
  return in;
}

Graph complete(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph::from_edges(e, n);
}

Matrix pi_mask(const Graph& g, bool per_source) {
  const auto pi = stationary_distribution(g);
  Matrix w(g.num_nodes(), g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    for (std::size_t j = 0; j < g.num_nodes(); ++j) w(i, j) = per_source ? pi[j] : pi[i];
  return w;
}

}  // namespace

TEST_SUITE("attention") {
  TEST_CASE("feature map is elu + 1") {
    CHECK(feature_map(0.0) == 1.0);
    CHECK(feature_map(1.5) == 2.5);
    CHECK(feature_map(-1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(feature_map(-40.0) > 0.0);
  }

  TEST_CASE("dense STA oracle agrees with the test-side definition") {
    const auto in = instance(14, 3, 1);
    for (std::size_t k = 0; k <= 4; ++k) {
      CHECK(max_abs_diff(sta_k_dense_oracle(in.g, k, in.q, in.k, in.v), oracle::sta_k(in.g, k, in.q, in.k, in.v)) <
            1e-12);
    }
  }

  TEST_CASE("nested propagation equals the dense oracle for every hop and head") {
    for (std::size_t heads : {1, 2, 4}) {
      const auto in = instance(20, 2 * heads, 10 + heads);
      const auto fast = sta_all_hops_efficient(in.g, 5, in.q, in.k, in.v, heads);
      REQUIRE(fast.size() == 6);
      CHECK(fast[0] == in.v);
      for (std::size_t h = 0; h < heads; ++h) {
        const Matrix qh = slice_cols(in.q, 2 * h, 2), kh = slice_cols(in.k, 2 * h, 2), vh = slice_cols(in.v, 2 * h, 2);
        for (std::size_t k = 1; k <= 5; ++k) {
          CHECK(max_abs_diff(slice_cols(fast[k], 2 * h, 2), oracle::sta_k(in.g, k, qh, kh, vh)) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("forward-only path reproduces the recorded op exactly") {
    const auto in = instance(25, 4, 17);
    const auto fast = sta_all_hops_efficient(in.g, 4, in.q, in.k, in.v, 2);
    ad::Tape t;
    const auto recorded = sta_all_hops(in.g, 4, 2, t.constant(in.q), t.constant(in.k), t.constant(in.v));
    for (std::size_t k = 0; k <= 4; ++k) CHECK(fast[k] == recorded[k].value());
  }

  TEST_CASE("a reused workspace gives the same hops for new inputs and shapes") {
    StaWorkspace ws;
    for (std::uint64_t seed : {18, 19}) {
      const auto in = instance(15 + seed, 4, seed);
      const auto with_ws = sta_all_hops_efficient(in.g, 3, in.q, in.k, in.v, ws, 2);
      const auto fresh = sta_all_hops_efficient(in.g, 3, in.q, in.k, in.v, 2);
      for (std::size_t k = 0; k <= 3; ++k) CHECK(with_ws[k] == fresh[k]);
    }
  }

  TEST_CASE("constant values pass through unchanged") {
    auto in = instance(12, 3, 2);
    in.v = Matrix(12, 3, 1.0);
    for (const Matrix& out : sta_all_hops_efficient(in.g, 4, in.q, in.k, in.v)) {
      for (double x : out.values()) CHECK(x == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("outputs are convex combinations of value rows") {
    const auto in = instance(16, 2, 3);
    for (const Matrix& out : sta_all_hops_efficient(in.g, 3, in.q, in.k, in.v)) {
      for (std::size_t c = 0; c < 2; ++c) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t j = 0; j < 16; ++j) {
          lo = std::min(lo, in.v(j, c));
          hi = std::max(hi, in.v(j, c));
        }
        for (std::size_t i = 0; i < 16; ++i) {
          CHECK(out(i, c) >= lo - 1e-12);
          CHECK(out(i, c) <= hi + 1e-12);
        }
      }
    }
  }

  TEST_CASE("node relabelling permutes the output rows") {
    const auto in = instance(15, 4, 4);
    std::vector<NodeId> perm(15);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(5);
    rng.shuffle(std::span<NodeId>(perm));
    auto permute_rows = [&](const Matrix& m) {
      Matrix out(m.rows(), m.cols());
      for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t c = 0; c < m.cols(); ++c) out(perm[i], c) = m(i, c);
      return out;
    };
    const auto base = sta_all_hops_efficient(in.g, 3, in.q, in.k, in.v, 2);
    const auto moved = sta_all_hops_efficient(in.g.permuted(perm), 3, permute_rows(in.q), permute_rows(in.k),
                                              permute_rows(in.v), 2);
    for (std::size_t k = 0; k <= 3; ++k) CHECK(max_abs_diff(permute_rows(base[k]), moved[k]) < 1e-12);
  }

  TEST_CASE("global attention equals the all-ones mask") {
    const auto in = instance(10, 3, 6);
    CHECK(max_abs_diff(global_sa(in.q, in.k, in.v), oracle::weighted_attention(Matrix(10, 10, 1.0), in.q, in.k, in.v)) <
          1e-12);
  }

  TEST_CASE("multi-head global attention runs each head on its own block") {
    const auto in = instance(10, 4, 7);
    const Matrix both = global_sa(in.q, in.k, in.v, 2);
    for (std::size_t h = 0; h < 2; ++h) {
      const Matrix one = global_sa(slice_cols(in.q, 2 * h, 2), slice_cols(in.k, 2 * h, 2), slice_cols(in.v, 2 * h, 2));
      CHECK(max_abs_diff(slice_cols(both, 2 * h, 2), one) < 1e-13);
    }
  }

  TEST_CASE("stationary masks") {
    const auto in = instance(12, 3, 8);
    const Matrix sa = global_sa(in.q, in.k, in.v);
    // pi_i weights cancel in the normalization
    CHECK(max_abs_diff(global_sa_pi(in.g, in.q, in.k, in.v, PiWeighting::PerTarget), sa) < 1e-12);
    CHECK(max_abs_diff(global_sa_pi(in.g, in.q, in.k, in.v, PiWeighting::PerSource),
                       oracle::weighted_attention(pi_mask(in.g, true), in.q, in.k, in.v)) < 1e-12);
  }

  TEST_CASE("deep hops converge to global attention on a non-bipartite graph") {
    const auto in = instance(12, 3, 9, 0.4);
    REQUIRE_FALSE(is_bipartite(in.g));
    const auto hops = sta_all_hops_efficient(in.g, 300, in.q, in.k, in.v);
    CHECK(max_abs_diff(hops.back(), global_sa(in.q, in.k, in.v)) < 1e-9);
  }

  TEST_CASE("complete graph: one hop is global attention with the self term removed") {
    const std::size_t n = 6;
    const auto in = instance(n, 2, 10);
    const Graph g = complete(n);
    Matrix mask(n, n, 1.0);
    for (std::size_t i = 0; i < n; ++i) mask(i, i) = 0.0;
    CHECK(max_abs_diff(sta_all_hops_efficient(g, 1, in.q, in.k, in.v)[1],
                       oracle::weighted_attention(mask, in.q, in.k, in.v)) < 1e-12);
  }

  TEST_CASE("fused hop op passes the finite-difference check") {
    const auto in = instance(9, 4, 11);
    ad::Parameter q("q", in.q), k("k", in.k), v("v", in.v);
    ad::Parameter* ps[] = {&q, &k, &v};
    Rng rng(12);
    std::vector<Matrix> weights;
    for (int i = 0; i <= 3; ++i) weights.push_back(oracle::gaussian(9, 4, rng));
    const double err = ad::gradient_check(
        [&](ad::Tape& t) {
          const auto outs = sta_all_hops(in.g, 3, 2, t.param(q), t.param(k), t.param(v));
          ad::Var total = ad::sum(ad::hadamard(outs[0], t.constant(weights[0])));
          for (std::size_t h = 1; h < outs.size(); ++h) {
            total = ad::add(total, ad::sum(ad::hadamard(outs[h], t.constant(weights[h]))));
          }
          return total;
        },
        ps);
    CHECK(err < 1e-6);
  }

  TEST_CASE("a single hop used alone still back-propagates") {
    const auto in = instance(8, 2, 13);
    ad::Parameter q("q", in.q), k("k", in.k), v("v", in.v);
    ad::Parameter* ps[] = {&q, &k, &v};
    const double err = ad::gradient_check(
        [&](ad::Tape& t) { return ad::sum(sta_all_hops(in.g, 4, 1, t.param(q), t.param(k), t.param(v))[2]); }, ps);
    CHECK(err < 1e-6);
  }

  TEST_CASE("global attention passes the finite-difference check") {
    const auto in = instance(7, 4, 14);
    ad::Parameter q("q", in.q), k("k", in.k), v("v", in.v);
    ad::Parameter* ps[] = {&q, &k, &v};
    Rng rng(15);
    const Matrix w = oracle::gaussian(7, 4, rng);
    const double err = ad::gradient_check(
        [&](ad::Tape& t) {
          return ad::sum(ad::hadamard(global_sa(t.param(q), t.param(k), t.param(v), 2), t.constant(w)));
        },
        ps);
    CHECK(err < 1e-6);
  }

  TEST_CASE("configuration errors") {
    StaConfig cfg;
    cfg.hidden = 10;
    cfg.heads = 4;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.heads = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    const auto in = instance(6, 3, 16);
    CHECK_THROWS_AS((void)sta_all_hops_efficient(in.g, 2, in.q, in.k, in.v, 2), Error);
    CHECK_THROWS_AS((void)sta_all_hops_efficient(in.g, 2, Matrix(5, 3), in.k, in.v), Error);
  }
}

TEST_SUITE("msta") {
  struct Setup {
    Instance in;
    StaConfig cfg;
    StaParams params;
  };

  Setup setup(GateMode gate, Aggregation agg, std::uint64_t seed) {
    Setup s{instance(10, 8, seed), {}, {}};
    s.cfg.hops = 3;
    s.cfg.heads = 2;
    s.cfg.hidden = 8;
    s.cfg.gate = gate;
    s.cfg.aggregation = agg;
    Rng rng(seed + 1);
    s.params = StaParams::init(s.cfg, rng);
    for (double& x : s.params.gates.value.values()) x = rng.normal();
    for (double& x : s.params.gpr_weights.value.values()) x = rng.normal();
    return s;
  }

  TEST_CASE("gated heads are scaled blocks of STA_k projected by W_O") {
    for (GateMode gate : {GateMode::SoftmaxGate, GateMode::RawGate, GateMode::NoGate}) {
      auto s = setup(gate, Aggregation::Gpr, 20);
      ad::Tape t;
      const auto outs = msta(s.in.g, s.cfg, s.params, t.constant(s.in.q), t.constant(s.in.k), t.constant(s.in.v));
      const Matrix w = effective_gates(s.cfg, s.params);
      REQUIRE(w.rows() == 3);
      REQUIRE(w.cols() == 2);
      CHECK(outs[0].value() == s.in.v);
      for (std::size_t k = 1; k <= 3; ++k) {
        Matrix heads(10, 8);
        for (std::size_t h = 0; h < 2; ++h) {
          const Matrix one = oracle::sta_k(s.in.g, k, slice_cols(s.in.q, 4 * h, 4), slice_cols(s.in.k, 4 * h, 4),
                                           slice_cols(s.in.v, 4 * h, 4));
          for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t c = 0; c < 4; ++c) heads(i, 4 * h + c) = w(k - 1, h) * one(i, c);
        }
        CHECK(max_abs_diff(outs[k].value(), oracle::multiply(heads, s.params.output_projection.value)) < 1e-10);
      }
    }
  }

  TEST_CASE("effective gates: softmax rows sum to one, raw passes through, none is ones") {
    auto soft = setup(GateMode::SoftmaxGate, Aggregation::Gpr, 21);
    const Matrix w = effective_gates(soft.cfg, soft.params);
    for (std::size_t k = 0; k < 3; ++k) CHECK(w(k, 0) + w(k, 1) == doctest::Approx(1.0).epsilon(1e-14));
    auto raw = setup(GateMode::RawGate, Aggregation::Gpr, 22);
    CHECK(effective_gates(raw.cfg, raw.params) == raw.params.gates.value);
    auto none = setup(GateMode::NoGate, Aggregation::Gpr, 23);
    CHECK(effective_gates(none.cfg, none.params) == Matrix(3, 2, 1.0));
  }

  TEST_CASE("default parameters") {
    StaConfig cfg;
    cfg.hops = 4;
    cfg.heads = 2;
    cfg.hidden = 8;
    Rng rng(1);
    StaParams p = StaParams::init(cfg, rng, true);
    CHECK(p.gates.value == Matrix(4, 2, 0.0));
    CHECK(p.gpr_weights.value == Matrix(1, 5, 1.0));
    CHECK(p.teleport.value == Matrix(1, 1, 1.0));
    CHECK_FALSE(p.gates.decay);
    CHECK_FALSE(p.gpr_weights.decay);
    CHECK(p.output_projection.decay);
    CHECK(p.concat_projection.value.empty());
  }

  TEST_CASE("aggregations against hand-built sums") {
    const Aggregation kinds[] = {Aggregation::Gpr, Aggregation::Sum, Aggregation::Concat, Aggregation::AttnReadout};
    for (Aggregation agg : kinds) {
      auto s = setup(GateMode::SoftmaxGate, agg, 30);
      ad::Tape t;
      const auto outs = msta(s.in.g, s.cfg, s.params, t.constant(s.in.q), t.constant(s.in.k), t.constant(s.in.v));
      const Matrix got = aggregate_hops(outs, s.cfg, s.params).value();
      Matrix expected(10, 8);
      if (agg == Aggregation::Gpr) {
        for (std::size_t k = 0; k <= 3; ++k) add_inplace(expected, outs[k].value(), s.params.gpr_weights.value(0, k));
      } else if (agg == Aggregation::Sum) {
        for (std::size_t k = 0; k <= 3; ++k) add_inplace(expected, outs[k].value());
      } else if (agg == Aggregation::Concat) {
        std::vector<Matrix> parts;
        for (const auto& o : outs) parts.push_back(o.value());
        expected = oracle::multiply(concat_cols(parts), s.params.concat_projection.value);
      } else {
        const Matrix& wa = s.params.readout.value;
        for (std::size_t i = 0; i < 10; ++i) {
          std::vector<double> score;
          for (std::size_t k = 1; k <= 3; ++k) {
            double z = 0.0;
            for (std::size_t c = 0; c < 8; ++c) z += wa(0, c) * outs[0].value()(i, c) + wa(0, 8 + c) * outs[k].value()(i, c);
            score.push_back(z);
          }
          const double mx = *std::max_element(score.begin(), score.end());
          double tot = 0.0;
          for (double& z : score) tot += (z = std::exp(z - mx));
          for (std::size_t c = 0; c < 8; ++c) {
            expected(i, c) = outs[0].value()(i, c);
            for (std::size_t k = 1; k <= 3; ++k) expected(i, c) += score[k - 1] / tot * outs[k].value()(i, c);
          }
        }
      }
      CHECK(max_abs_diff(got, expected) < 1e-12);
    }
  }

  TEST_CASE("one-hot GPR weights select a single hop") {
    auto s = setup(GateMode::SoftmaxGate, Aggregation::Gpr, 31);
    s.params.gpr_weights.value = Matrix(1, 4, 0.0);
    s.params.gpr_weights.value(0, 0) = 1.0;
    ad::Tape t;
    const auto outs = msta(s.in.g, s.cfg, s.params, t.constant(s.in.q), t.constant(s.in.k), t.constant(s.in.v));
    CHECK(aggregate_hops(outs, s.cfg, s.params).value() == s.in.v);
  }

  TEST_CASE("every gate and aggregation passes the finite-difference check") {
    for (GateMode gate : {GateMode::SoftmaxGate, GateMode::RawGate, GateMode::NoGate}) {
      for (Aggregation agg : {Aggregation::Gpr, Aggregation::Sum, Aggregation::Concat, Aggregation::AttnReadout}) {
        auto s = setup(gate, agg, 40);
        ad::Parameter q("q", s.in.q), k("k", s.in.k), v("v", s.in.v);
        std::vector<ad::Parameter*> ps{&q, &k, &v};
        for (ad::Parameter* p : s.params.trainable()) ps.push_back(p);
        Rng rng(41);
        const Matrix w = oracle::gaussian(10, 8, rng);
        const double err = ad::gradient_check(
            [&](ad::Tape& t) {
              const auto outs = msta(s.in.g, s.cfg, s.params, t.param(q), t.param(k), t.param(v));
              return ad::sum(ad::hadamard(aggregate_hops(outs, s.cfg, s.params), t.constant(w)));
            },
            ps);
        CAPTURE(static_cast<int>(gate));
        CAPTURE(static_cast<int>(agg));
        CHECK(err < 1e-6);
      }
    }
  }
}
