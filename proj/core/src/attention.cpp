#include "sta/attention.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "sta/error.hpp"

namespace sta {

void StaConfig::validate() const {
  if (heads == 0) throw validation_error("StaConfig: heads must be >= 1");
  if (hidden == 0 || hidden % heads != 0) {
    throw validation_error("StaConfig: hidden (" + std::to_string(hidden) +
                           ") must be a positive multiple of heads (" + std::to_string(heads) + ")");
  }
}

StaParams StaParams::init(const StaConfig& cfg, Rng& rng, bool with_teleport) {
  cfg.validate();
  StaParams p;
  p.gates = ad::Parameter("sta.gates", Matrix(cfg.hops, cfg.heads, 0.0), false);
  p.gpr_weights = ad::Parameter("sta.gpr_weights", Matrix(1, cfg.hops + 1, 1.0), false);
  p.output_projection = ad::Parameter("sta.w_o", ad::glorot_uniform(cfg.hidden, cfg.hidden, rng));
  if (cfg.aggregation == Aggregation::Concat) {
    p.concat_projection = ad::Parameter(
        "sta.w_concat", ad::glorot_uniform((cfg.hops + 1) * cfg.hidden, cfg.hidden, rng));
  }
  if (cfg.aggregation == Aggregation::AttnReadout) {
    p.readout = ad::Parameter("sta.w_a", ad::glorot_uniform(1, 2 * cfg.hidden, rng));
  }
  if (with_teleport) p.teleport = ad::Parameter("sta.alpha_t", Matrix(1, 1, 1.0), false);
  return p;
}

std::vector<ad::Parameter*> StaParams::trainable() {
  std::vector<ad::Parameter*> out;
  for (ad::Parameter* p : {&gates, &gpr_weights, &output_projection, &concat_projection, &readout, &teleport}) {
    if (!p->value.empty()) out.push_back(p);
  }
  return out;
}

double feature_map(double x) { return x >= 0.0 ? x + 1.0 : std::exp(x); }

Matrix feature_map(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = feature_map(m.data()[i]);
  return out;
}

namespace {

void check_qkv(const Matrix& q, const Matrix& k, const Matrix& v, std::size_t heads, const char* who) {
  if (q.rows() != k.rows() || q.rows() != v.rows()) {
    throw validation_error(std::string(who) + ": Q, K, V row counts differ (" + q.shape_string() + ", " +
                           k.shape_string() + ", " + v.shape_string() + ")");
  }
  if (q.cols() != k.cols()) {
    throw validation_error(std::string(who) + ": Q and K widths differ (" + q.shape_string() + " vs " +
                           k.shape_string() + ")");
  }
  if (heads == 0 || q.cols() % heads != 0 || v.cols() % heads != 0) {
    throw validation_error(std::string(who) + ": widths not divisible by " + std::to_string(heads) + " heads");
  }
}

double feature_map_slope(double x) { return x >= 0.0 ? 1.0 : std::exp(x); }

// Intermediate state of the nested propagation, kept for the backward pass.
struct HopCache {
  std::size_t n = 0, heads = 0, dk = 0, dv = 0, hops = 0;
  double eps = kDenominatorEpsilon;
  Matrix phi_q, phi_k;
  std::vector<Matrix> kv;   // kv[k-1]: N x heads*dk*dv after k hops
  std::vector<Matrix> key;  // key[k-1]: N x heads*dk after k hops
  std::vector<Matrix> den;  // den[k-1]: N x heads
};

// Row i, head h: the dk x dv block phi_k(i, h)^T v(i, h), flattened.
void outer_products_into(const HopCache& c, const Matrix& phi_k, const Matrix& v, Matrix& kv) {
  const std::size_t blk = c.dk * c.dv;
  if (kv.rows() != c.n || kv.cols() != c.heads * blk) kv = Matrix(c.n, c.heads * blk);
  for (std::size_t i = 0; i < c.n; ++i) {
    for (std::size_t h = 0; h < c.heads; ++h) {
      const double* fk = phi_k.data() + i * c.heads * c.dk + h * c.dk;
      const double* vr = v.data() + i * c.heads * c.dv + h * c.dv;
      double* dst = kv.data() + i * c.heads * blk + h * blk;
      for (std::size_t a = 0; a < c.dk; ++a)
        for (std::size_t b = 0; b < c.dv; ++b) dst[a * c.dv + b] = fk[a] * vr[b];
    }
  }
}

Matrix outer_products(const HopCache& c, const Matrix& phi_k, const Matrix& v) {
  Matrix kv;
  outer_products_into(c, phi_k, v, kv);
  return kv;
}

// out(i, h, b) = phi_q(i, h) . kv(i, h, :, b) / (phi_q(i, h) . key(i, h) + eps)
Matrix read_out(const HopCache& c, const Matrix& kv, const Matrix& key, Matrix& den) {
  const std::size_t blk = c.dk * c.dv;
  Matrix out(c.n, c.heads * c.dv);
  den = Matrix(c.n, c.heads);
  for (std::size_t i = 0; i < c.n; ++i) {
    for (std::size_t h = 0; h < c.heads; ++h) {
      const double* fq = c.phi_q.data() + i * c.heads * c.dk + h * c.dk;
      const double* ks = key.data() + i * c.heads * c.dk + h * c.dk;
      const double* s = kv.data() + i * c.heads * blk + h * blk;
      double* o = out.data() + i * c.heads * c.dv + h * c.dv;
      double d = 0.0;
      for (std::size_t a = 0; a < c.dk; ++a) {
        d += fq[a] * ks[a];
        const double w = fq[a];
        const double* srow = s + a * c.dv;
        for (std::size_t b = 0; b < c.dv; ++b) o[b] += w * srow[b];
      }
#if STA_FINITE_CHECKS
      if (!(d > 0.0)) throw numerical_error("subtree attention: non-positive normaliser");
#endif
      d += c.eps;
      den(i, h) = d;
      for (std::size_t b = 0; b < c.dv; ++b) o[b] /= d;
    }
  }
  return out;
}

}  // namespace

Matrix masked_attention_dense(const Matrix& mask, const Matrix& q, const Matrix& k, const Matrix& v, double eps) {
  check_qkv(q, k, v, 1, "masked_attention_dense");
  const std::size_t n = q.rows();
  if (mask.rows() != n || mask.cols() != n) throw validation_error("masked_attention_dense: mask must be N x N");
  const Matrix fq = feature_map(q);
  const Matrix fk = feature_map(k);
  Matrix out(n, v.cols());
  for (std::size_t i = 0; i < n; ++i) {
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask(i, j) == 0.0) continue;
      double sim = 0.0;
      for (std::size_t a = 0; a < q.cols(); ++a) sim += fq(i, a) * fk(j, a);
      const double w = mask(i, j) * sim;
      den += w;
      for (std::size_t b = 0; b < v.cols(); ++b) out(i, b) += w * v(j, b);
    }
    for (std::size_t b = 0; b < v.cols(); ++b) out(i, b) /= den + eps;
  }
  return out;
}

Matrix sta_k_dense_oracle(const Graph& g, std::size_t k, const Matrix& q, const Matrix& key, const Matrix& v,
                          double eps) {
  check_qkv(q, key, v, 1, "sta_k_dense_oracle");
  if (q.rows() != g.num_nodes()) throw validation_error("sta_k_dense_oracle: row count differs from graph size");
  if (k == 0) return v;
  const Matrix step = dense_transition(g, TransitionKind::RandomWalk);
  Matrix power = step;
  for (std::size_t i = 1; i < k; ++i) power = matmul(power, step);
  return masked_attention_dense(power, q, key, v, eps);
}

std::vector<ad::Var> sta_all_hops(const Graph& g, std::size_t hops, std::size_t heads, ad::Var q, ad::Var k,
                                  ad::Var v, double eps) {
  check_qkv(q.value(), k.value(), v.value(), heads, "sta_all_hops");
  if (q.rows() != g.num_nodes()) throw validation_error("sta_all_hops: row count differs from graph size");

  std::vector<ad::Var> outputs{v};
  if (hops == 0) return outputs;

  auto c = std::make_shared<HopCache>();
  c->n = q.rows();
  c->heads = heads;
  c->dk = q.cols() / heads;
  c->dv = v.cols() / heads;
  c->hops = hops;
  c->eps = eps;
  c->phi_q = feature_map(q.value());
  c->phi_k = feature_map(k.value());

  const Matrix kv = outer_products(*c, c->phi_k, v.value());

  std::vector<Matrix> hop_values;
  hop_values.reserve(hops);
  const Matrix* prev_kv = &kv;
  const Matrix* prev_key = &c->phi_k;
  for (std::size_t step = 1; step <= hops; ++step) {
    c->kv.push_back(propagate(g, TransitionKind::RandomWalk, *prev_kv));
    c->key.push_back(propagate(g, TransitionKind::RandomWalk, *prev_key));
    prev_kv = &c->kv.back();
    prev_key = &c->key.back();
    c->den.emplace_back();
    hop_values.push_back(read_out(*c, c->kv.back(), c->key.back(), c->den.back()));
  }

  ad::Tape& tape = q.tape();
  const std::size_t iq = q.id(), ik = k.id(), iv = v.id();
  const Graph* graph = &g;
  auto holder_ids = std::make_shared<std::vector<std::size_t>>();

  // The fused node carries no value; its backward runs once every hop
  // output (recorded after it) has received its gradient.
  const ad::Var fused = tape.record("sta_all_hops", Matrix{}, [c, iq, ik, iv, graph, holder_ids](ad::Tape& t, std::size_t) {
    const std::size_t n = c->n, heads = c->heads, dk = c->dk, dv = c->dv;
    const std::size_t blk = dk * dv;
    Matrix g_phi_q(n, heads * dk);
    Matrix lam_kv(n, heads * blk);
    Matrix lam_key(n, heads * dk);
    for (std::size_t step = c->hops; step >= 1; --step) {
      if (step < c->hops) {
        lam_kv = propagate_transpose(*graph, TransitionKind::RandomWalk, lam_kv);
        lam_key = propagate_transpose(*graph, TransitionKind::RandomWalk, lam_key);
      }
      const std::size_t out_id = (*holder_ids)[step - 1];
      if (!t.has_grad(out_id)) continue;
      const Matrix& gout = t.grad(out_id);
      const Matrix& out = t.value(out_id);
      const Matrix& kv = c->kv[step - 1];
      const Matrix& key = c->key[step - 1];
      const Matrix& den = c->den[step - 1];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t h = 0; h < heads; ++h) {
          const double d = den(i, h);
          const double* go = gout.data() + i * heads * dv + h * dv;
          const double* o = out.data() + i * heads * dv + h * dv;
          double g_den = 0.0;
          for (std::size_t b = 0; b < dv; ++b) g_den -= go[b] * o[b];
          g_den /= d;
          const double* fq = c->phi_q.data() + i * heads * dk + h * dk;
          const double* s = kv.data() + i * heads * blk + h * blk;
          const double* ks = key.data() + i * heads * dk + h * dk;
          double* lk = lam_kv.data() + i * heads * blk + h * blk;
          double* lz = lam_key.data() + i * heads * dk + h * dk;
          double* gq = g_phi_q.data() + i * heads * dk + h * dk;
          for (std::size_t a = 0; a < dk; ++a) {
            const double w = fq[a] / d;
            const double* srow = s + a * dv;
            double* lrow = lk + a * dv;
            double acc = 0.0;
            for (std::size_t b = 0; b < dv; ++b) {
              lrow[b] += w * go[b];
              acc += srow[b] * go[b];
            }
            lz[a] += fq[a] * g_den;
            gq[a] += acc / d + ks[a] * g_den;
          }
        }
      }
    }
    lam_kv = propagate_transpose(*graph, TransitionKind::RandomWalk, lam_kv);
    lam_key = propagate_transpose(*graph, TransitionKind::RandomWalk, lam_key);

    const Matrix& qv = t.value(iq);
    const Matrix& kvv = t.value(ik);
    const Matrix& vv = t.value(iv);
    Matrix& gq = t.grad_mut(iq);
    Matrix& gk = t.grad_mut(ik);
    Matrix& gv = t.grad_mut(iv);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t h = 0; h < heads; ++h) {
        const double* lk = lam_kv.data() + i * heads * blk + h * blk;
        const double* fk = c->phi_k.data() + i * heads * dk + h * dk;
        const double* vr = vv.data() + i * heads * dv + h * dv;
        double* gvr = gv.data() + i * heads * dv + h * dv;
        for (std::size_t a = 0; a < dk; ++a) {
          const std::size_t col = h * dk + a;
          double acc = lam_key(i, col);
          for (std::size_t b = 0; b < dv; ++b) {
            acc += lk[a * dv + b] * vr[b];
            gvr[b] += lk[a * dv + b] * fk[a];
          }
          gk(i, col) += acc * feature_map_slope(kvv(i, col));
          gq(i, col) += g_phi_q(i, col) * feature_map_slope(qv(i, col));
        }
      }
    }
  });

  const std::size_t fused_id = fused.id();
  for (auto& value : hop_values) {
    outputs.push_back(tape.record("sta_hop", std::move(value),
                                  [fused_id](ad::Tape& t, std::size_t) { t.grad_mut(fused_id); }));
    holder_ids->push_back(outputs.back().id());
  }
  return outputs;
}

std::vector<Matrix> sta_all_hops_efficient(const Graph& g, std::size_t hops, const Matrix& q, const Matrix& k,
                                           const Matrix& v, std::size_t heads, double eps) {
  StaWorkspace ws;
  return sta_all_hops_efficient(g, hops, q, k, v, ws, heads, eps);
}

std::vector<Matrix> sta_all_hops_efficient(const Graph& g, std::size_t hops, const Matrix& q, const Matrix& k,
                                           const Matrix& v, StaWorkspace& ws, std::size_t heads, double eps) {
  check_qkv(q, k, v, heads, "sta_all_hops_efficient");
  if (q.rows() != g.num_nodes()) throw validation_error("sta_all_hops_efficient: row count differs from graph size");
  std::vector<Matrix> out{v};
  if (hops == 0) return out;

  HopCache c;
  c.n = q.rows();
  c.heads = heads;
  c.dk = q.cols() / heads;
  c.dv = v.cols() / heads;
  c.eps = eps;
  c.phi_q = feature_map(q);
  ws.key = feature_map(k);
  outer_products_into(c, ws.key, v, ws.kv);
  for (std::size_t step = 1; step <= hops; ++step) {
    propagate_into(g, TransitionKind::RandomWalk, ws.kv, ws.kv_next);
    propagate_into(g, TransitionKind::RandomWalk, ws.key, ws.key_next);
    std::swap(ws.kv, ws.kv_next);
    std::swap(ws.key, ws.key_next);
    out.push_back(read_out(c, ws.kv, ws.key, ws.den));
  }
  return out;
}

ad::Var global_sa(ad::Var q, ad::Var k, ad::Var v, std::size_t heads, double eps) {
  check_qkv(q.value(), k.value(), v.value(), heads, "global_sa");
  const std::size_t n = q.rows();
  const std::size_t dk = q.cols() / heads;
  const std::size_t dv = v.cols() / heads;

  auto fq = std::make_shared<Matrix>(feature_map(q.value()));
  auto fk = std::make_shared<Matrix>(feature_map(k.value()));
  // Per head: kv_sum = sum_j phi(k_j)^T v_j (dk x dv), key_sum = sum_j phi(k_j).
  auto kv_sum = std::make_shared<Matrix>(heads * dk, dv);
  auto key_sum = std::make_shared<Matrix>(heads, dk);
  const Matrix& vv = v.value();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t a = 0; a < dk; ++a) {
        const double f = (*fk)(j, h * dk + a);
        (*key_sum)(h, a) += f;
        for (std::size_t b = 0; b < dv; ++b) (*kv_sum)(h * dk + a, b) += f * vv(j, h * dv + b);
      }
    }
  }
  auto den = std::make_shared<Matrix>(n, heads);
  Matrix out(n, heads * dv);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < heads; ++h) {
      double d = 0.0;
      for (std::size_t a = 0; a < dk; ++a) {
        const double f = (*fq)(i, h * dk + a);
        d += f * (*key_sum)(h, a);
        for (std::size_t b = 0; b < dv; ++b) out(i, h * dv + b) += f * (*kv_sum)(h * dk + a, b);
      }
      d += eps;
      (*den)(i, h) = d;
      for (std::size_t b = 0; b < dv; ++b) out(i, h * dv + b) /= d;
    }
  }

  const std::size_t iq = q.id(), ik = k.id(), iv = v.id();
  return q.tape().record("global_sa", std::move(out),
                         [=](ad::Tape& t, std::size_t self) {
                           const Matrix& go = t.grad(self);
                           const Matrix& o = t.value(self);
                           Matrix g_kv(heads * dk, dv);
                           Matrix g_key(heads, dk);
                           Matrix& gq = t.grad_mut(iq);
                           const Matrix& qv = t.value(iq);
                           for (std::size_t i = 0; i < n; ++i) {
                             for (std::size_t h = 0; h < heads; ++h) {
                               const double d = (*den)(i, h);
                               double g_den = 0.0;
                               for (std::size_t b = 0; b < dv; ++b) g_den -= go(i, h * dv + b) * o(i, h * dv + b);
                               g_den /= d;
                               for (std::size_t a = 0; a < dk; ++a) {
                                 const double f = (*fq)(i, h * dk + a);
                                 double acc = (*key_sum)(h, a) * g_den;
                                 for (std::size_t b = 0; b < dv; ++b) {
                                   const double gn = go(i, h * dv + b) / d;
                                   g_kv(h * dk + a, b) += f * gn;
                                   acc += (*kv_sum)(h * dk + a, b) * gn;
                                 }
                                 g_key(h, a) += f * g_den;
                                 gq(i, h * dk + a) += acc * feature_map_slope(qv(i, h * dk + a));
                               }
                             }
                           }
                           const Matrix& kval = t.value(ik);
                           const Matrix& vval = t.value(iv);
                           Matrix& gk = t.grad_mut(ik);
                           Matrix& gv = t.grad_mut(iv);
                           for (std::size_t j = 0; j < n; ++j) {
                             for (std::size_t h = 0; h < heads; ++h) {
                               for (std::size_t a = 0; a < dk; ++a) {
                                 double acc = g_key(h, a);
                                 const double f = (*fk)(j, h * dk + a);
                                 for (std::size_t b = 0; b < dv; ++b) {
                                   acc += g_kv(h * dk + a, b) * vval(j, h * dv + b);
                                   gv(j, h * dv + b) += g_kv(h * dk + a, b) * f;
                                 }
                                 gk(j, h * dk + a) += acc * feature_map_slope(kval(j, h * dk + a));
                               }
                             }
                           }
                         });
}

Matrix global_sa(const Matrix& q, const Matrix& k, const Matrix& v, std::size_t heads, double eps) {
  ad::Tape tape;
  return global_sa(tape.constant(q), tape.constant(k), tape.constant(v), heads, eps).value();
}

Matrix global_sa_pi(const Graph& g, const Matrix& q, const Matrix& k, const Matrix& v, PiWeighting weighting,
                    double eps) {
  check_qkv(q, k, v, 1, "global_sa_pi");
  const std::size_t n = q.rows();
  if (n != g.num_nodes()) throw validation_error("global_sa_pi: row count differs from graph size");
  const auto pi = stationary_distribution(g);
  const Matrix fq = feature_map(q);
  const Matrix fk = feature_map(k);
  const std::size_t dk = q.cols(), dv = v.cols();

  Matrix kv_sum(dk, dv);
  std::vector<double> key_sum(dk, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = weighting == PiWeighting::PerSource ? pi[j] : 1.0;
    for (std::size_t a = 0; a < dk; ++a) {
      const double f = w * fk(j, a);
      key_sum[a] += f;
      for (std::size_t b = 0; b < dv; ++b) kv_sum(a, b) += f * v(j, b);
    }
  }
  Matrix out(n, dv);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weighting == PiWeighting::PerTarget ? pi[i] : 1.0;
    double d = 0.0;
    for (std::size_t a = 0; a < dk; ++a) {
      const double f = w * fq(i, a);
      d += f * key_sum[a];
      for (std::size_t b = 0; b < dv; ++b) out(i, b) += f * kv_sum(a, b);
    }
    for (std::size_t b = 0; b < dv; ++b) out(i, b) /= d + eps;
  }
  return out;
}

std::vector<ad::Var> msta(const Graph& g, const StaConfig& cfg, StaParams& params, ad::Var q, ad::Var k, ad::Var v) {
  cfg.validate();
  if (q.cols() != cfg.hidden || k.cols() != cfg.hidden || v.cols() != cfg.hidden) {
    throw validation_error("msta: Q, K, V must be N x " + std::to_string(cfg.hidden));
  }
  auto hop_outputs = sta_all_hops(g, cfg.hops, cfg.heads, q, k, v, cfg.denominator_epsilon);
  if (cfg.hops == 0) return hop_outputs;

  ad::Tape& tape = q.tape();
  ad::Var head_weights;
  if (cfg.gate == GateMode::SoftmaxGate) {
    head_weights = ad::row_softmax(tape.param(params.gates));
  } else if (cfg.gate == GateMode::RawGate) {
    head_weights = tape.param(params.gates);
  }
  const ad::Var w_o = tape.param(params.output_projection);
  std::vector<ad::Var> out{v};
  for (std::size_t step = 1; step <= cfg.hops; ++step) {
    ad::Var heads_k = hop_outputs[step];
    if (head_weights.valid()) heads_k = ad::scale_col_blocks(heads_k, head_weights, step - 1);
    out.push_back(ad::matmul(heads_k, w_o));
  }
  return out;
}

Matrix effective_gates(const StaConfig& cfg, const StaParams& params) {
  Matrix out(cfg.hops, cfg.heads, 1.0);
  if (cfg.gate == GateMode::NoGate) return out;
  if (cfg.gate == GateMode::RawGate) return params.gates.value;
  ad::Tape tape;
  return ad::row_softmax(tape.constant(params.gates.value)).value();
}

ad::Var aggregate_hops(std::span<const ad::Var> outputs, const StaConfig& cfg, StaParams& params) {
  if (outputs.empty()) throw validation_error("aggregate_hops: no hop outputs");
  const std::size_t width = outputs.front().cols();
  for (const auto& o : outputs) {
    if (o.cols() != width || o.rows() != outputs.front().rows()) {
      throw validation_error("aggregate_hops: hop outputs have inconsistent shapes");
    }
  }
  ad::Tape& tape = outputs.front().tape();

  switch (cfg.aggregation) {
    case Aggregation::Gpr: {
      if (params.gpr_weights.value.cols() < outputs.size()) {
        throw validation_error("aggregate_hops: " + std::to_string(outputs.size()) + " hops but only " +
                               std::to_string(params.gpr_weights.value.cols()) + " GPR weights");
      }
      const ad::Var alpha = tape.param(params.gpr_weights);
      ad::Var acc = ad::scale_by_entry(outputs[0], alpha, 0, 0);
      for (std::size_t k = 1; k < outputs.size(); ++k) acc = ad::add(acc, ad::scale_by_entry(outputs[k], alpha, 0, k));
      return acc;
    }
    case Aggregation::Sum: {
      ad::Var acc = outputs[0];
      for (std::size_t k = 1; k < outputs.size(); ++k) acc = ad::add(acc, outputs[k]);
      return acc;
    }
    case Aggregation::Concat: {
      if (params.concat_projection.value.rows() != outputs.size() * width) {
        throw validation_error("aggregate_hops: concat projection does not match " +
                               std::to_string(outputs.size()) + " hops of width " + std::to_string(width));
      }
      return ad::matmul(ad::concat_cols(outputs), tape.param(params.concat_projection));
    }
    case Aggregation::AttnReadout: {
      if (outputs.size() == 1) return outputs[0];
      if (params.readout.value.cols() != 2 * width) {
        throw validation_error("aggregate_hops: readout weights do not match width " + std::to_string(width));
      }
      const ad::Var w_a = ad::transpose(tape.param(params.readout));
      std::vector<ad::Var> scores;
      for (std::size_t k = 1; k < outputs.size(); ++k) {
        const ad::Var pair[] = {outputs[0], outputs[k]};
        scores.push_back(ad::matmul(ad::concat_cols(pair), w_a));
      }
      const ad::Var beta = ad::row_softmax(ad::concat_cols(scores));
      ad::Var acc = outputs[0];
      for (std::size_t k = 1; k < outputs.size(); ++k) {
        acc = ad::add(acc, ad::scale_rows(outputs[k], ad::slice_cols(beta, k - 1, 1)));
      }
      return acc;
    }
  }
  throw validation_error("aggregate_hops: unknown aggregation");
}

}  // namespace sta
