#include "sta/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "sta/optim.hpp"
#include "sta/spectral.hpp"

namespace sta {

Splits make_splits(std::size_t n, const SplitRatios& r, std::uint64_t seed) {
  if (r.train < 0.0 || r.val < 0.0 || r.test < 0.0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
    throw validation_error("make_splits: ratios must be non-negative and sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::derive(seed, 2);
  rng.shuffle(std::span<std::size_t>(order));

  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * r.train));
  const auto n_train_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (r.train + r.val)));
  Splits s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train_val, n)));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(std::min(n_train_val, n)), order.end());
  if (s.train.empty() || s.val.empty() || s.test.empty()) {
    throw validation_error("make_splits: " + std::to_string(n) + " nodes leave an empty split (" +
                           std::to_string(s.train.size()) + "/" + std::to_string(s.val.size()) + "/" +
                           std::to_string(s.test.size()) + ")");
  }
  return s;
}

namespace {

std::size_t argmax_row(const Matrix& m, std::size_t i) {
  const auto row = m.row(i);
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

double positive_probability(const Matrix& logits, std::size_t i) {
  const auto row = logits.row(i);
  const double mx = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double z : row) total += std::exp(z - mx);
  return std::exp(row[1] - mx) / total;
}

}  // namespace

double evaluate(const Matrix& logits, std::span<const int> labels, std::span<const std::size_t> mask, Metric metric) {
  if (mask.empty()) throw validation_error("evaluate: empty mask");
  if (labels.size() != logits.rows()) throw validation_error("evaluate: label count differs from logit rows");

  if (metric == Metric::Accuracy) {
    std::size_t correct = 0;
    for (std::size_t i : mask) correct += argmax_row(logits, i) == static_cast<std::size_t>(labels[i]);
    return static_cast<double>(correct) / static_cast<double>(mask.size());
  }

  if (logits.cols() < 2) throw validation_error("evaluate: ROC-AUC needs at least two logit columns");
  std::vector<std::pair<double, int>> scored;
  scored.reserve(mask.size());
  for (std::size_t i : mask) {
    if (labels[i] != 0 && labels[i] != 1) throw validation_error("evaluate: ROC-AUC requires binary labels");
    scored.emplace_back(positive_probability(logits, i), labels[i]);
  }
  std::sort(scored.begin(), scored.end());
  double positives = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < scored.size();) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (scored[t].second == 1) {
        positives += 1.0;
        rank_sum += mean_rank;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(scored.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) throw validation_error("evaluate: ROC-AUC needs both classes in the mask");
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw validation_error("TrainConfig: lr must be non-negative");
  if (!(weight_decay >= 0.0)) throw validation_error("TrainConfig: weight_decay must be non-negative");
  if (max_epochs == 0) throw validation_error("TrainConfig: max_epochs must be positive");
  if (patience > max_epochs) throw validation_error("TrainConfig: patience exceeds max_epochs");
}

Matrix with_positional_encoding(const Graph& g, const Matrix& x, std::size_t m) {
  if (m == 0) return x;
  const Matrix pe = laplacian_pe(g, m);
  const Matrix parts[] = {x, pe};
  return concat_cols(parts);
}

TrainResult train(const Graph& g, const Matrix& x, std::span<const int> labels, const Splits& splits,
                  ModelConfig model, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.num_nodes();
  if (x.rows() != n || labels.size() != n) {
    throw validation_error("train: features (" + std::to_string(x.rows()) + ") and labels (" +
                           std::to_string(labels.size()) + ") must both have " + std::to_string(n) + " rows");
  }
  if (splits.train.empty() || splits.val.empty() || splits.test.empty()) {
    throw validation_error("train: every split must be non-empty");
  }

  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  TrainReport& report = result.report;
  report.seed = cfg.seed;

  std::size_t pe_dims = cfg.pe_dims;
  if (pe_dims > 0 && n > kMaxSpectralNodes) {
    report.warnings.push_back("positional encoding skipped: " + std::to_string(n) + " nodes exceeds the " +
                              std::to_string(kMaxSpectralNodes) + "-node spectral limit");
    pe_dims = 0;
  }
  if (pe_dims >= n) pe_dims = n > 1 ? n - 1 : 0;
  result.inputs = with_positional_encoding(g, x, pe_dims);

  int max_label = 0;
  for (int y : labels) {
    if (y < 0) throw validation_error("train: negative label");
    max_label = std::max(max_label, y);
  }
  model.in_features = result.inputs.cols();
  model.classes = std::max(model.classes, static_cast<std::size_t>(max_label) + 1);
  model.validate();
  result.model = model;

  Rng init_rng = Rng::derive(cfg.seed, 0);
  Rng dropout_rng = Rng::derive(cfg.seed, 1);
  StagnnParams params = StagnnParams::init(model, init_rng);
  const auto trainable = params.trainable();
  AdamState adam(AdamOptions{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});

  double best = -1.0;
  std::size_t best_epoch = 0;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    try {
      for (ad::Parameter* p : trainable) p->zero_grad();
      ad::Tape tape;
      const ad::Var logits = model_forward(tape, g, model, params, result.inputs, true, dropout_rng);
      const ad::Var loss = ad::cross_entropy(logits, labels, splits.train);
      const Matrix eval_logits =
          model.dropout > 0.0 ? predict(g, model, params, result.inputs) : logits.value();

      report.loss.push_back(loss.value()(0, 0));
      report.train_metric.push_back(evaluate(eval_logits, labels, splits.train, cfg.metric));
      report.val_metric.push_back(evaluate(eval_logits, labels, splits.val, cfg.metric));
      report.test_metric.push_back(evaluate(eval_logits, labels, splits.test, cfg.metric));
      report.epochs_run = epoch + 1;

      if (report.val_metric.back() > best) {
        best = report.val_metric.back();
        best_epoch = epoch;
        result.best_params = params;
      }

      tape.backward(loss);
      adam_step(adam, trainable);
    } catch (const TrainDivergence&) {
      throw;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
      throw TrainDivergence(epoch, e.what());
    }
    if (epoch - best_epoch >= cfg.patience) {
      report.early_stopped = true;
      break;
    }
  }

  report.best_epoch = best_epoch;
  report.best_val_metric = report.val_metric[best_epoch];
  report.test_metric_at_best = report.test_metric[best_epoch];
  report.train_metric_at_best = report.train_metric[best_epoch];
  const auto alpha = result.best_params.sta.gpr_weights.value.values();
  report.gpr_weights.assign(alpha.begin(), alpha.end());
  report.gates = result.best_params.sta.gates.value;
  report.effective_gates = effective_gates(model.sta, result.best_params.sta);
  report.final_gates = params.sta.gates.value;
  report.final_effective_gates = effective_gates(model.sta, params.sta);
  result.final_params = std::move(params);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace sta
