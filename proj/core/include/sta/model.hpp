#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sta/attention.hpp"
#include "sta/autodiff.hpp"
#include "sta/checkpoint.hpp"
#include "sta/graph.hpp"
#include "sta/rng.hpp"

namespace sta {

struct ModelConfig {
  std::size_t in_features = 0;  // f + positional-encoding columns
  std::size_t classes = 0;
  StaConfig sta;
  double dropout = 0.0;
  // When set, the propagation block is alpha_T * SA + sum_{k<=h} alpha_k * MSTA_k.
  std::optional<std::size_t> global_hops;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct StagnnParams {
  ad::Parameter mlp_w1, mlp_b1;  // f_in -> hidden
  ad::Parameter mlp_w2, mlp_b2;  // hidden -> hidden
  ad::Parameter w_q, w_k, w_v;   // hidden -> hidden
  ad::Parameter w_cls, b_cls;    // hidden -> classes
  StaParams sta;

  static StagnnParams init(const ModelConfig& cfg, Rng& rng);
  std::vector<ad::Parameter*> trainable();
};

// H = MLP(X'), Q/K/V = H W_{Q,K,V}, O = aggregate(MSTA_0..K), logits = O W_cls + b.
ad::Var stagnn_forward(ad::Tape& tape, const Graph& g, const ModelConfig& cfg, StagnnParams& params,
                       const Matrix& x, bool training, Rng& rng);

// Same encoder and classifier, propagation alpha_T * SA + sum_{k=0}^{hops} alpha_k * MSTA_k.
ad::Var ga_sta_forward(ad::Tape& tape, const Graph& g, const ModelConfig& cfg, StagnnParams& params,
                       const Matrix& x, std::size_t hops, bool training, Rng& rng);

// Dispatches on cfg.global_hops.
ad::Var model_forward(ad::Tape& tape, const Graph& g, const ModelConfig& cfg, StagnnParams& params,
                      const Matrix& x, bool training, Rng& rng);

// Eval-mode logits.
Matrix predict(const Graph& g, const ModelConfig& cfg, StagnnParams& params, const Matrix& x);

Checkpoint make_checkpoint(const ModelConfig& cfg, StagnnParams& params, const std::string& metadata);
// Copies every tensor of `ckpt` into the matching parameter; shapes must agree.
void load_parameters(const Checkpoint& ckpt, StagnnParams& params);

}  // namespace sta
