#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sta/autodiff.hpp"
#include "sta/graph.hpp"
#include "sta/matrix.hpp"
#include "sta/rng.hpp"

namespace sta {

enum class FeatureMapKind { EluPlusOne };

enum class GateMode {
  SoftmaxGate,  // head weights softmax(g_k)
  RawGate,      // head weights g_k as learned
  NoGate,       // every head weighted 1
};

enum class Aggregation { Gpr, Sum, Concat, AttnReadout };

inline constexpr double kDenominatorEpsilon = 1e-12;

struct StaConfig {
  std::size_t hops = 3;     // K, height of the rooted subtree
  std::size_t heads = 1;    // H
  std::size_t hidden = 64;  // H * head_dim
  GateMode gate = GateMode::SoftmaxGate;
  Aggregation aggregation = Aggregation::Gpr;
  FeatureMapKind feature_map = FeatureMapKind::EluPlusOne;
  double denominator_epsilon = kDenominatorEpsilon;

  std::size_t head_dim() const { return hidden / heads; }
  // Throws unless heads >= 1 and hidden is divisible by heads.
  void validate() const;
  friend bool operator==(const StaConfig&, const StaConfig&) = default;
};

// Learnable state of one multi-head subtree-attention block. Matrices that a
// configuration does not use are left empty.
struct StaParams {
  ad::Parameter gates;              // hops x heads, g_k per row, init 0
  ad::Parameter gpr_weights;        // 1 x (hops + 1), alpha_k, init 1
  ad::Parameter output_projection;  // hidden x hidden, W_O
  ad::Parameter concat_projection;  // (hops + 1) * hidden x hidden
  ad::Parameter readout;            // 1 x 2 * hidden, W_a
  ad::Parameter teleport;           // 1 x 1, alpha_T

  static StaParams init(const StaConfig& cfg, Rng& rng, bool with_teleport = false);
  std::vector<ad::Parameter*> trainable();
};

// elu(x) + 1
double feature_map(double x);
Matrix feature_map(const Matrix& m);

// Masked kernel attention evaluated by explicit double loop:
// row i = sum_j W_ij phi(q_i).phi(k_j) v_j / (sum_j W_ij phi(q_i).phi(k_j) + eps).
Matrix masked_attention_dense(const Matrix& mask, const Matrix& q, const Matrix& k, const Matrix& v,
                              double eps = kDenominatorEpsilon);

// Single-head STA_k through a dense transition power built by repeated dense
// multiplication. O(N^3) per hop; the reference the efficient path is tested
// against.
Matrix sta_k_dense_oracle(const Graph& g, std::size_t k, const Matrix& q, const Matrix& key,
                          const Matrix& v, double eps = kDenominatorEpsilon);

// STA_0..STA_hops for every head. phi(K) and the stacked per-node products
// phi(K_i)^T V_i are propagated once per hop along the random-walk operator,
// and each hop is read out with phi(Q). Element 0 is `v` itself; element k is
// N x (heads * head_dim) with heads laid out as contiguous column blocks.
// Cost O(hops * |E| * d_k * d_v).
std::vector<ad::Var> sta_all_hops(const Graph& g, std::size_t hops, std::size_t heads, ad::Var q,
                                  ad::Var k, ad::Var v, double eps = kDenominatorEpsilon);
std::vector<Matrix> sta_all_hops_efficient(const Graph& g, std::size_t hops, const Matrix& q,
                                           const Matrix& k, const Matrix& v, std::size_t heads = 1,
                                           double eps = kDenominatorEpsilon);

// Propagation buffers for the forward-only path; reused while shapes match.
struct StaWorkspace {
  Matrix kv, kv_next, key, key_next, den;
};
std::vector<Matrix> sta_all_hops_efficient(const Graph& g, std::size_t hops, const Matrix& q,
                                           const Matrix& k, const Matrix& v, StaWorkspace& ws,
                                           std::size_t heads = 1, double eps = kDenominatorEpsilon);

// Kernelized global self-attention, linear in N.
ad::Var global_sa(ad::Var q, ad::Var k, ad::Var v, std::size_t heads = 1,
                  double eps = kDenominatorEpsilon);
Matrix global_sa(const Matrix& q, const Matrix& k, const Matrix& v, std::size_t heads = 1,
                 double eps = kDenominatorEpsilon);

enum class PiWeighting {
  PerTarget,  // mask pi_i for the attending node i: the limit of A_rw^k
  PerSource,  // mask pi_j for the attended node j
};

// Global attention with a stationary-distribution mask (single head).
Matrix global_sa_pi(const Graph& g, const Matrix& q, const Matrix& k, const Matrix& v,
                    PiWeighting weighting = PiWeighting::PerTarget, double eps = kDenominatorEpsilon);

// Multi-head STA with hop-wise gates. q, k, v are N x hidden. Element 0 is v;
// element k >= 1 is [gate_k^1 STA_k(head 1), ...] * W_O.
std::vector<ad::Var> msta(const Graph& g, const StaConfig& cfg, StaParams& params, ad::Var q,
                          ad::Var k, ad::Var v);

// Per-hop head weights actually applied (hops x heads).
Matrix effective_gates(const StaConfig& cfg, const StaParams& params);

// Hop aggregation over outputs[0..hops].
ad::Var aggregate_hops(std::span<const ad::Var> outputs, const StaConfig& cfg, StaParams& params);

}  // namespace sta
