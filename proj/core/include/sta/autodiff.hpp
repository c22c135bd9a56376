#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sta/graph.hpp"
#include "sta/matrix.hpp"
#include "sta/rng.hpp"

namespace sta::ad {

// A trainable tensor living outside any tape. Leaf nodes created from it
// accumulate into `grad` during backward.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Matrix value, bool decay = true)
      : name(std::move(name)), value(std::move(value)), decay(decay) {}

  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }

  std::string name;
  Matrix value;
  Matrix grad;
  bool decay = true;  // participates in weight decay
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  // Gradient slot; an empty matrix until backward has reached the node.
  const Matrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t id() const noexcept { return id_; }
  Tape& tape() const noexcept { return *tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so walking the
// tape backwards from the root is a reverse topological traversal.
// A tape belongs to a single thread.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var param(Parameter& p);
  // Appends an op result. `backward` reads grad(self) and pushes into parents.
  Var record(const char* op, Matrix value, Backward backward);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  bool has_grad(std::size_t id) const { return nodes_[id].touched; }
  // Gradient slot of `id`, zero-allocated on first use.
  Matrix& grad_mut(std::size_t id);
  void accumulate(std::size_t id, const Matrix& g, double scale = 1.0);

  // Seeds d(root)/d(root) = 1 and runs every reachable backward rule.
  void backward(Var root);
  // Drops all nodes so the tape can be reused.
  void reset();

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    bool touched = false;
  };

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
// a + broadcast of a 1 x cols bias row.
Var add_row(Var a, Var bias);
Var mul_scalar(Var a, double s);
Var hadamard(Var a, Var b);
Var elementwise_div(Var a, Var b);
Var relu(Var a);
// elu(x) + 1: x + 1 for x >= 0, exp(x) otherwise.
Var elu_plus_one(Var a);
// Inverted dropout; the identity when !training or p == 0.
Var dropout(Var a, double p, bool training, Rng& rng);
Var row_softmax(Var a);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
// a * s(r, c) where s is a node (a learnable scalar picked out of a matrix).
Var scale_by_entry(Var a, Var s, std::size_t r, std::size_t c);
// Column block h of a (width cols/blocks) scaled by gates(row, h).
Var scale_col_blocks(Var a, Var gates, std::size_t row);
// Row i of a scaled by col(i, 0).
Var scale_rows(Var a, Var col);
Var sum(Var a);
// Random-walk propagation T * a with T = A D^-1.
Var propagate(const Graph& g, Var a);
// Mean of -log softmax(logits)[i, labels[i]] over i in mask.
Var cross_entropy(Var logits, std::span<const int> labels, std::span<const std::size_t> mask);

// Uniform(-a, a) with a = sqrt(6 / (rows + cols)).
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

// Central-difference check of the gradients of f with respect to params.
// Returns the worst over parameters of max_i |analytic - numeric| divided by
// max_i max(|analytic|, |numeric|) (floored at 1e-8).
double gradient_check(const std::function<Var(Tape&)>& f, std::span<Parameter* const> params,
                      double h = 1e-5);

}  // namespace sta::ad
