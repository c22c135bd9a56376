#include "sta/optim.hpp"

#include <cmath>

#include "sta/error.hpp"

namespace sta {

void adam_step(AdamState& state, std::span<ad::Parameter* const> params) {
  if (state.first_moment.empty()) {
    for (const ad::Parameter* p : params) {
      state.first_moment.emplace_back(p->value.rows(), p->value.cols());
      state.second_moment.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw validation_error("adam_step: parameter list changed between steps");
  }

  const AdamOptions& o = state.options;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    ad::Parameter& p = *params[k];
    Matrix& m = state.first_moment[k];
    Matrix& v = state.second_moment[k];
    if (!m.same_shape(p.value)) throw validation_error("adam_step: moment shape differs for " + p.name);
    if (p.grad.empty()) p.zero_grad();
    if (!p.grad.same_shape(p.value)) throw validation_error("adam_step: gradient shape differs for " + p.name);

    double* theta = p.value.data();
    const double* g = p.grad.data();
    const double decay = p.decay ? o.lr * o.weight_decay : 0.0;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      theta[i] -= decay * theta[i];
      m.data()[i] = o.beta1 * m.data()[i] + (1.0 - o.beta1) * g[i];
      v.data()[i] = o.beta2 * v.data()[i] + (1.0 - o.beta2) * g[i] * g[i];
      const double m_hat = m.data()[i] / correction1;
      const double v_hat = v.data()[i] / correction2;
      theta[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
  }
}

}  // namespace sta
