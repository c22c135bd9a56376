#include "sta/model.hpp"

#include <string>

#include "sta/error.hpp"

namespace sta {

void ModelConfig::validate() const {
  sta.validate();
  if (in_features == 0) throw validation_error("ModelConfig: in_features must be positive");
  if (classes == 0) throw validation_error("ModelConfig: classes must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw validation_error("ModelConfig: dropout must lie in [0, 1)");
  if (global_hops && *global_hops > sta.hops) {
    throw validation_error("ModelConfig: global attention hops " + std::to_string(*global_hops) +
                           " exceed subtree height " + std::to_string(sta.hops));
  }
}

StagnnParams StagnnParams::init(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t hidden = cfg.sta.hidden;
  StagnnParams p;
  p.mlp_w1 = ad::Parameter("mlp.w1", ad::glorot_uniform(cfg.in_features, hidden, rng));
  p.mlp_b1 = ad::Parameter("mlp.b1", Matrix(1, hidden), false);
  p.mlp_w2 = ad::Parameter("mlp.w2", ad::glorot_uniform(hidden, hidden, rng));
  p.mlp_b2 = ad::Parameter("mlp.b2", Matrix(1, hidden), false);
  p.w_q = ad::Parameter("attn.w_q", ad::glorot_uniform(hidden, hidden, rng));
  p.w_k = ad::Parameter("attn.w_k", ad::glorot_uniform(hidden, hidden, rng));
  p.w_v = ad::Parameter("attn.w_v", ad::glorot_uniform(hidden, hidden, rng));
  p.w_cls = ad::Parameter("cls.w", ad::glorot_uniform(hidden, cfg.classes, rng));
  p.b_cls = ad::Parameter("cls.b", Matrix(1, cfg.classes), false);
  p.sta = StaParams::init(cfg.sta, rng, cfg.global_hops.has_value());
  return p;
}

std::vector<ad::Parameter*> StagnnParams::trainable() {
  std::vector<ad::Parameter*> out{&mlp_w1, &mlp_b1, &mlp_w2, &mlp_b2, &w_q, &w_k, &w_v, &w_cls, &b_cls};
  for (ad::Parameter* p : sta.trainable()) out.push_back(p);
  return out;
}

namespace {

struct Projections {
  ad::Var q, k, v;
};

Projections encode(ad::Tape& tape, const ModelConfig& cfg, StagnnParams& params, const Matrix& x, bool training,
                   Rng& rng) {
  if (x.cols() != cfg.in_features) {
    throw validation_error("model: input has " + std::to_string(x.cols()) + " columns, expected " +
                           std::to_string(cfg.in_features));
  }
  ad::Var h = ad::matmul(tape.constant(x), tape.param(params.mlp_w1));
  h = ad::relu(ad::add_row(h, tape.param(params.mlp_b1)));
  h = ad::dropout(h, cfg.dropout, training, rng);
  h = ad::add_row(ad::matmul(h, tape.param(params.mlp_w2)), tape.param(params.mlp_b2));
  h = ad::dropout(h, cfg.dropout, training, rng);
  return {ad::matmul(h, tape.param(params.w_q)), ad::matmul(h, tape.param(params.w_k)),
          ad::matmul(h, tape.param(params.w_v))};
}

ad::Var classify(ad::Tape& tape, StagnnParams& params, ad::Var o) {
  return ad::add_row(ad::matmul(o, tape.param(params.w_cls)), tape.param(params.b_cls));
}

}  // namespace

ad::Var stagnn_forward(ad::Tape& tape, const Graph& g, const ModelConfig& cfg, StagnnParams& params, const Matrix& x,
                       bool training, Rng& rng) {
  cfg.validate();
  const auto [q, k, v] = encode(tape, cfg, params, x, training, rng);
  const auto hops = msta(g, cfg.sta, params.sta, q, k, v);
  return classify(tape, params, aggregate_hops(hops, cfg.sta, params.sta));
}

ad::Var ga_sta_forward(ad::Tape& tape, const Graph& g, const ModelConfig& cfg, StagnnParams& params, const Matrix& x,
                       std::size_t hops, bool training, Rng& rng) {
  cfg.validate();
  if (hops > cfg.sta.hops) {
    throw validation_error("ga_sta_forward: " + std::to_string(hops) + " hops requested, model has " +
                           std::to_string(cfg.sta.hops));
  }
  if (params.sta.teleport.value.empty()) throw validation_error("ga_sta_forward: model has no teleport coefficient");
  const auto [q, k, v] = encode(tape, cfg, params, x, training, rng);

  StaConfig local = cfg.sta;
  local.hops = hops;
  local.aggregation = Aggregation::Gpr;
  const auto sta_hops = msta(g, local, params.sta, q, k, v);

  const ad::Var alpha_t = tape.param(params.sta.teleport);
  ad::Var o = ad::scale_by_entry(global_sa(q, k, v, cfg.sta.heads, cfg.sta.denominator_epsilon), alpha_t, 0, 0);
  o = ad::add(o, aggregate_hops(sta_hops, local, params.sta));
  return classify(tape, params, o);
}

ad::Var model_forward(ad::Tape& tape, const Graph& g, const ModelConfig& cfg, StagnnParams& params, const Matrix& x,
                      bool training, Rng& rng) {
  if (cfg.global_hops) return ga_sta_forward(tape, g, cfg, params, x, *cfg.global_hops, training, rng);
  return stagnn_forward(tape, g, cfg, params, x, training, rng);
}

Matrix predict(const Graph& g, const ModelConfig& cfg, StagnnParams& params, const Matrix& x) {
  ad::Tape tape;
  Rng unused(0);
  return model_forward(tape, g, cfg, params, x, false, unused).value();
}

Checkpoint make_checkpoint(const ModelConfig&, StagnnParams& params, const std::string& metadata) {
  Checkpoint ckpt;
  ckpt.metadata = metadata;
  for (const ad::Parameter* p : params.trainable()) ckpt.tensors.push_back({p->name, p->value});
  return ckpt;
}

void load_parameters(const Checkpoint& ckpt, StagnnParams& params) {
  for (ad::Parameter* p : params.trainable()) {
    const Matrix* stored = ckpt.find(p->name);
    if (stored == nullptr) throw validation_error("checkpoint: missing tensor '" + p->name + "'");
    if (!stored->same_shape(p->value)) {
      throw validation_error("checkpoint: tensor '" + p->name + "' is " + stored->shape_string() + ", model expects " +
                             p->value.shape_string());
    }
    p->value = *stored;
  }
}

}  // namespace sta
