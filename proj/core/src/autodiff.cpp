#include "sta/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "sta/error.hpp"

namespace sta::ad {

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(Matrix value) { return record("constant", std::move(value), nullptr); }

Var Tape::param(Parameter& p) {
  Parameter* target = &p;
  return record("param", p.value, [target](Tape& t, std::size_t self) {
    if (target->grad.empty()) target->zero_grad();
    add_inplace(target->grad, t.grad(self));
  });
}

Var Tape::record(const char* op, Matrix value, Backward backward) {
#if STA_FINITE_CHECKS
  if (!value.all_finite()) {
    throw numerical_error(std::string("autodiff: non-finite output from ") + op + " (" +
                          value.shape_string() + ")");
  }
#else
  (void)op;
#endif
  nodes_.push_back(Node{std::move(value), Matrix{}, std::move(backward), false});
  return Var(this, nodes_.size() - 1);
}

Matrix& Tape::grad_mut(std::size_t id) {
  Node& node = nodes_[id];
  if (!node.touched) {
    node.grad = Matrix(node.value.rows(), node.value.cols());
    node.touched = true;
  }
  return node.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g, double scale) {
  add_inplace(grad_mut(id), g, scale);
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw validation_error("backward: root belongs to another tape");
  if (backward_done_) throw validation_error("backward: already run on this tape; reset() first");
  const Matrix& v = value(root.id());
  if (v.rows() != 1 || v.cols() != 1) {
    throw validation_error("backward: root must be 1x1, got " + v.shape_string());
  }
  backward_done_ = true;
  grad_mut(root.id())(0, 0) = 1.0;
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (node.touched && node.backward) node.backward(*this, id);
  }
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

namespace {

void same_shape(const Var& a, const Var& b, const char* op) {
  if (!a.value().same_shape(b.value())) {
    throw validation_error(std::string(op) + ": shape mismatch (" + a.value().shape_string() +
                           " vs " + b.value().shape_string() + ")");
  }
}

template <typename F>
Matrix map(const Matrix& m, F f) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = f(m.data()[i]);
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record("matmul", sta::matmul(a.value(), b.value()), [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    t.accumulate(ia, sta::matmul(g, sta::transpose(t.value(ib))));
    t.accumulate(ib, sta::matmul(sta::transpose(t.value(ia)), g));
  });
}

Var transpose(Var a) {
  const std::size_t ia = a.id();
  return a.tape().record("transpose", sta::transpose(a.value()), [ia](Tape& t, std::size_t self) {
    t.accumulate(ia, sta::transpose(t.grad(self)));
  });
}

Var add(Var a, Var b) {
  same_shape(a, b, "add");
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("add", sta::add(a.value(), b.value()), [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var sub(Var a, Var b) {
  same_shape(a, b, "sub");
  const std::size_t ia = a.id(), ib = b.id();
  Matrix out = a.value();
  add_inplace(out, b.value(), -1.0);
  return a.tape().record("sub", std::move(out), [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self), -1.0);
  });
}

Var add_row(Var a, Var bias) {
  const Matrix& av = a.value();
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw validation_error("add_row: bias " + bv.shape_string() + " does not match " + av.shape_string());
  }
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
  const std::size_t ia = a.id(), ib = bias.id();
  return a.tape().record("add_row", std::move(out), [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    t.accumulate(ia, g);
    Matrix& gb = t.grad_mut(ib);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
  });
}

Var mul_scalar(Var a, double s) {
  const std::size_t ia = a.id();
  return a.tape().record("mul_scalar", map(a.value(), [s](double x) { return s * x; }),
                         [ia, s](Tape& t, std::size_t self) { t.accumulate(ia, t.grad(self), s); });
}

Var hadamard(Var a, Var b) {
  same_shape(a, b, "hadamard");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.value().data()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("hadamard", std::move(out), [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& av = t.value(ia);
    const Matrix& bv = t.value(ib);
    Matrix& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * bv.data()[i];
    Matrix& gb = t.grad_mut(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] += g.data()[i] * av.data()[i];
  });
}

Var elementwise_div(Var a, Var b) {
  same_shape(a, b, "elementwise_div");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] /= b.value().data()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("elementwise_div", std::move(out), [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& av = t.value(ia);
    const Matrix& bv = t.value(ib);
    Matrix& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] / bv.data()[i];
    Matrix& gb = t.grad_mut(ib);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = bv.data()[i];
      gb.data()[i] -= g.data()[i] * av.data()[i] / (d * d);
    }
  });
}

Var relu(Var a) {
  const std::size_t ia = a.id();
  return a.tape().record("relu", map(a.value(), [](double x) { return x > 0.0 ? x : 0.0; }),
                         [ia](Tape& t, std::size_t self) {
                           const Matrix& g = t.grad(self);
                           const Matrix& x = t.value(ia);
                           Matrix& ga = t.grad_mut(ia);
                           for (std::size_t i = 0; i < g.size(); ++i)
                             if (x.data()[i] > 0.0) ga.data()[i] += g.data()[i];
                         });
}

Var elu_plus_one(Var a) {
  const std::size_t ia = a.id();
  return a.tape().record(
      "elu_plus_one", map(a.value(), [](double x) { return x >= 0.0 ? x + 1.0 : std::exp(x); }),
      [ia](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        const Matrix& x = t.value(ia);
        Matrix& ga = t.grad_mut(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double xi = x.data()[i];
          ga.data()[i] += g.data()[i] * (xi >= 0.0 ? 1.0 : std::exp(xi));
        }
      });
}

Var dropout(Var a, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw validation_error("dropout: p must lie in [0, 1)");
  if (!training || p == 0.0) return a;
  auto mask = std::make_shared<Matrix>(a.rows(), a.cols());
  const double keep_scale = 1.0 / (1.0 - p);
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double m = rng.uniform() < p ? 0.0 : keep_scale;
    mask->data()[i] = m;
    out.data()[i] *= m;
  }
  const std::size_t ia = a.id();
  return a.tape().record("dropout", std::move(out), [ia, mask](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * mask->data()[i];
  });
}

Var row_softmax(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) total += out(i, j) = std::exp(row[j] - mx);
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) /= total;
  }
  const std::size_t ia = a.id();
  return a.tape().record("row_softmax", std::move(out), [ia](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& y = t.value(self);
    Matrix& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j) ga(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw validation_error("concat_cols: no inputs");
  std::vector<Matrix> values;
  std::vector<std::size_t> ids;
  values.reserve(parts.size());
  for (const Var& p : parts) {
    values.push_back(p.value());
    ids.push_back(p.id());
  }
  Tape& tape = parts.front().tape();
  return tape.record("concat_cols", sta::concat_cols(values), [ids](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    std::size_t offset = 0;
    for (std::size_t id : ids) {
      const std::size_t w = t.value(id).cols();
      Matrix& gp = t.grad_mut(id);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < w; ++j) gp(i, j) += g(i, offset + j);
      offset += w;
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  const std::size_t ia = a.id();
  return a.tape().record("slice_cols", sta::slice_cols(a.value(), begin, count),
                         [ia, begin](Tape& t, std::size_t self) {
                           const Matrix& g = t.grad(self);
                           Matrix& ga = t.grad_mut(ia);
                           for (std::size_t i = 0; i < g.rows(); ++i)
                             for (std::size_t j = 0; j < g.cols(); ++j) ga(i, begin + j) += g(i, j);
                         });
}

Var scale_by_entry(Var a, Var s, std::size_t r, std::size_t c) {
  const Matrix& sv = s.value();
  if (r >= sv.rows() || c >= sv.cols()) throw validation_error("scale_by_entry: index outside coefficient matrix");
  const double coeff = sv(r, c);
  const std::size_t ia = a.id(), is = s.id();
  return a.tape().record("scale_by_entry", map(a.value(), [coeff](double x) { return coeff * x; }),
                         [ia, is, r, c](Tape& t, std::size_t self) {
                           const Matrix& g = t.grad(self);
                           const Matrix& av = t.value(ia);
                           t.accumulate(ia, g, t.value(is)(r, c));
                           double dot = 0.0;
                           for (std::size_t i = 0; i < g.size(); ++i) dot += g.data()[i] * av.data()[i];
                           t.grad_mut(is)(r, c) += dot;
                         });
}

Var scale_col_blocks(Var a, Var gates, std::size_t row) {
  const Matrix& av = a.value();
  const Matrix& gv = gates.value();
  const std::size_t blocks = gv.cols();
  if (row >= gv.rows() || blocks == 0 || av.cols() % blocks != 0) {
    throw validation_error("scale_col_blocks: " + av.shape_string() + " cannot be split by gates " +
                           gv.shape_string());
  }
  const std::size_t width = av.cols() / blocks;
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= gv(row, j / width);
  const std::size_t ia = a.id(), ig = gates.id();
  return a.tape().record("scale_col_blocks", std::move(out), [ia, ig, row, width](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& x = t.value(ia);
    const Matrix& gv = t.value(ig);
    Matrix& ga = t.grad_mut(ia);
    Matrix& gg = t.grad_mut(ig);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      for (std::size_t j = 0; j < g.cols(); ++j) {
        const std::size_t h = j / width;
        ga(i, j) += g(i, j) * gv(row, h);
        gg(row, h) += g(i, j) * x(i, j);
      }
    }
  });
}

Var scale_rows(Var a, Var col) {
  const Matrix& av = a.value();
  const Matrix& cv = col.value();
  if (cv.cols() != 1 || cv.rows() != av.rows()) {
    throw validation_error("scale_rows: " + cv.shape_string() + " does not match " + av.shape_string());
  }
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= cv(i, 0);
  const std::size_t ia = a.id(), ic = col.id();
  return a.tape().record("scale_rows", std::move(out), [ia, ic](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& x = t.value(ia);
    const Matrix& c = t.value(ic);
    Matrix& ga = t.grad_mut(ia);
    Matrix& gc = t.grad_mut(ic);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      for (std::size_t j = 0; j < g.cols(); ++j) {
        ga(i, j) += g(i, j) * c(i, 0);
        gc(i, 0) += g(i, j) * x(i, j);
      }
    }
  });
}

Var sum(Var a) {
  double total = 0.0;
  for (double x : a.value().values()) total += x;
  Matrix out(1, 1, total);
  const std::size_t ia = a.id();
  return a.tape().record("sum", std::move(out), [ia](Tape& t, std::size_t self) {
    const double g = t.grad(self)(0, 0);
    Matrix& ga = t.grad_mut(ia);
    for (double& x : ga.values()) x += g;
  });
}

Var propagate(const Graph& g, Var a) {
  const std::size_t ia = a.id();
  const Graph* graph = &g;
  return a.tape().record("propagate", sta::propagate(g, TransitionKind::RandomWalk, a.value()),
                         [ia, graph](Tape& t, std::size_t self) {
                           t.accumulate(ia, propagate_transpose(*graph, TransitionKind::RandomWalk, t.grad(self)));
                         });
}

Var cross_entropy(Var logits, std::span<const int> labels, std::span<const std::size_t> mask) {
  const Matrix& z = logits.value();
  if (mask.empty()) throw validation_error("cross_entropy: empty mask");
  if (labels.size() != z.rows()) throw validation_error("cross_entropy: label count differs from logit rows");
  const std::size_t classes = z.cols();
  auto probs = std::make_shared<Matrix>(mask.size(), classes);
  double loss = 0.0;
  for (std::size_t m = 0; m < mask.size(); ++m) {
    const std::size_t i = mask[m];
    if (i >= z.rows()) throw validation_error("cross_entropy: mask index out of range");
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw validation_error("cross_entropy: label " + std::to_string(y) + " outside [0, " +
                             std::to_string(classes) + ")");
    }
    const auto row = z.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) total += std::exp(row[c] - mx);
    const double log_total = std::log(total) + mx;
    for (std::size_t c = 0; c < classes; ++c) (*probs)(m, c) = std::exp(row[c] - log_total);
    loss += log_total - row[y];
  }
  loss /= static_cast<double>(mask.size());

  std::vector<std::size_t> rows(mask.begin(), mask.end());
  std::vector<int> ys(labels.begin(), labels.end());
  const std::size_t il = logits.id();
  return logits.tape().record(
      "cross_entropy", Matrix(1, 1, loss),
      [il, probs, rows = std::move(rows), ys = std::move(ys)](Tape& t, std::size_t self) {
        const double g = t.grad(self)(0, 0) / static_cast<double>(rows.size());
        Matrix& gl = t.grad_mut(il);
        for (std::size_t m = 0; m < rows.size(); ++m) {
          const std::size_t i = rows[m];
          for (std::size_t c = 0; c < gl.cols(); ++c) gl(i, c) += g * (*probs)(m, c);
          gl(i, static_cast<std::size_t>(ys[i])) -= g;
        }
      });
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& x : m.values()) x = rng.uniform(-limit, limit);
  return m;
}

double gradient_check(const std::function<Var(Tape&)>& f, std::span<Parameter* const> params, double h) {
  if (!(h > 0.0)) throw validation_error("gradient_check: step must be positive");
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(f(tape));
  }
  auto eval = [&f]() {
    Tape tape;
    return f(tape).value()(0, 0);
  };
  double worst = 0.0;
  for (Parameter* p : params) {
    double diff = 0.0, scale = 1e-8;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      double& theta = p->value.data()[i];
      const double saved = theta;
      theta = saved + h;
      const double up = eval();
      theta = saved - h;
      const double down = eval();
      theta = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad.data()[i];
      diff = std::max(diff, std::abs(analytic - numeric));
      scale = std::max({scale, std::abs(analytic), std::abs(numeric)});
    }
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

}  // namespace sta::ad
