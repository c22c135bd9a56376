#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sta/autodiff.hpp"

namespace sta {

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Moment buffers are created lazily on the first step, one per parameter,
// in the order the parameters are passed.
struct AdamState {
  explicit AdamState(AdamOptions options = {}) : options(options) {}

  AdamOptions options;
  std::size_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

// Decoupled weight decay (theta -= lr * wd * theta, for params with decay set)
// followed by a bias-corrected Adam update from each parameter's grad.
void adam_step(AdamState& state, std::span<ad::Parameter* const> params);

}  // namespace sta
