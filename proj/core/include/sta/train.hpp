#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sta/error.hpp"
#include "sta/graph.hpp"
#include "sta/matrix.hpp"
#include "sta/model.hpp"

namespace sta {

enum class Metric { Accuracy, RocAuc };

struct SplitRatios {
  double train = 0.5;
  double val = 0.25;
  double test = 0.25;
  friend bool operator==(const SplitRatios&, const SplitRatios&) = default;
};

struct Splits {
  std::vector<std::size_t> train, val, test;
};

// Seeded uniform shuffle cut at round(N * train) and round(N * (train + val)).
Splits make_splits(std::size_t n, const SplitRatios& ratios, std::uint64_t seed);

// Accuracy: argmax (lowest index on ties) against labels over `mask`.
// RocAuc: Mann-Whitney statistic of softmax P(class 1), ties counted 1/2.
double evaluate(const Matrix& logits, std::span<const int> labels, std::span<const std::size_t> mask, Metric metric);

struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::size_t max_epochs = 3000;
  std::size_t patience = 200;
  std::uint64_t seed = 0;
  SplitRatios split;
  Metric metric = Metric::Accuracy;
  std::size_t pe_dims = 3;  // Laplacian eigenvectors appended to the features

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainReport {
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_val_metric = 0.0;
  double test_metric_at_best = 0.0;
  double train_metric_at_best = 0.0;
  std::vector<double> loss;
  std::vector<double> train_metric;
  std::vector<double> val_metric;
  std::vector<double> test_metric;
  std::vector<double> gpr_weights;  // alpha_0..alpha_K at the best epoch
  Matrix gates;                     // raw g_k rows at the best epoch
  Matrix effective_gates;           // head weights actually applied
  Matrix final_gates;               // raw g_k rows after the last epoch
  Matrix final_effective_gates;
  double wall_seconds = 0.0;
  bool early_stopped = false;
  std::vector<std::string> warnings;
};

struct TrainResult {
  TrainReport report;
  ModelConfig model;          // with in_features / classes resolved
  StagnnParams best_params;   // snapshot taken at the best validation epoch
  StagnnParams final_params;  // state after the last executed epoch
  Matrix inputs;              // features with positional encoding appended
};

// Raised when the loss or any intermediate stops being finite.
class TrainDivergence : public Error {
 public:
  TrainDivergence(std::size_t epoch, const std::string& what)
      : Error(ErrorKind::Numerical, "training diverged at epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

// [X, laplacian_pe(g, m)]; X unchanged when m == 0.
Matrix with_positional_encoding(const Graph& g, const Matrix& x, std::size_t m);

// Full-batch training with Adam and early stopping on the validation metric.
// `model.in_features` is set from the (encoded) inputs and `model.classes`
// is raised to cover every label.
TrainResult train(const Graph& g, const Matrix& x, std::span<const int> labels, const Splits& splits,
                  ModelConfig model, const TrainConfig& cfg);

}  // namespace sta
