#include "sta/report.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "sta/error.hpp"

namespace sta {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

json stamp_json(const Stamp& s) { return {{"command", s.command}, {"seed", s.seed}, {"config_hash", s.config_hash}}; }

json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

json model_json(const ModelConfig& m) {
  return {{"in_features", m.in_features},
          {"classes", m.classes},
          {"hops", m.sta.hops},
          {"heads", m.sta.heads},
          {"hidden", m.sta.hidden},
          {"gate", to_string(m.sta.gate)},
          {"aggregation", to_string(m.sta.aggregation)},
          {"dropout", m.dropout},
          {"global_hops", m.global_hops ? json(*m.global_hops) : json(nullptr)}};
}

const Matrix& require(const Checkpoint& ckpt, const std::string& name) {
  const Matrix* m = ckpt.find(name);
  if (m == nullptr) throw validation_error("checkpoint has no tensor '" + name + "'");
  return *m;
}

Matrix effective_from_checkpoint(const Checkpoint& ckpt, const StaConfig& sta) {
  StaParams p;
  if (sta.hops > 0) p.gates.value = require(ckpt, "sta.gates");
  return effective_gates(sta, p);
}

}  // namespace

Stamp make_stamp(const std::string& command, const RunConfig& cfg) {
  return {command, cfg.seed, hash_hex(config_hash(cfg))};
}

std::string train_report_json(const TrainReport& r, const RunConfig& cfg, const ModelConfig& model,
                              const Stamp& stamp) {
  json j = stamp_json(stamp);
  j["config"] = serialize_run_config(cfg);
  j["model"] = model_json(model);
  j["metric"] = to_string(cfg.train.metric);
  j["epochs_run"] = r.epochs_run;
  j["best_epoch"] = r.best_epoch;
  j["early_stopped"] = r.early_stopped;
  j["best_val_metric"] = r.best_val_metric;
  j["train_metric_at_best"] = r.train_metric_at_best;
  j["test_metric_at_best"] = r.test_metric_at_best;
  j["loss"] = r.loss;
  j["train_metric"] = r.train_metric;
  j["val_metric"] = r.val_metric;
  j["test_metric"] = r.test_metric;
  j["gpr_weights"] = r.gpr_weights;
  j["gates"] = matrix_json(r.gates);
  j["effective_gates"] = matrix_json(r.effective_gates);
  j["final_gates"] = matrix_json(r.final_gates);
  j["final_effective_gates"] = matrix_json(r.final_effective_gates);
  j["wall_seconds"] = r.wall_seconds;
  j["warnings"] = r.warnings;
  return j.dump(2);
}

std::string theorem_report_json(const ConvergenceReport* m, const RatioReport* r, const Stamp& stamp) {
  json j = stamp_json(stamp);
  if (m != nullptr) {
    json rows = json::array();
    for (const auto& row : m->mixing_times) {
      rows.push_back({{"epsilon", row.epsilon},
                      {"measured_k0", optional_json(row.measured)},
                      {"predicted_k0", row.predicted},
                      {"within_prediction", row.within_prediction}});
    }
    j["mixing"] = {{"num_nodes", m->num_nodes},
                   {"k_max", m->k_max},
                   {"spectral_gap", m->spectral_gap},
                   {"d_max", m->d_max},
                   {"d_min", m->d_min},
                   {"max_deviation", m->max_deviation},
                   {"max_column_l1", m->max_column_l1},
                   {"column_l1", m->column_l1},
                   {"rigorous_bound", m->rigorous_bound},
                   {"exp_bound", m->exp_bound},
                   {"rigorous_violations", m->rigorous_violations},
                   {"exp_violations", m->exp_violations},
                   {"k0", rows}};
  }
  if (r != nullptr) {
    json rows = json::array();
    for (const auto& row : r->bands) {
      rows.push_back({{"eta", row.eta},
                      {"measured_k1", optional_json(row.measured)},
                      {"predicted_k1", row.predicted},
                      {"violations_after_prediction", row.violations_after_prediction},
                      {"within_prediction", row.within_prediction}});
    }
    j["ratio"] = {{"num_nodes", r->num_nodes},
                  {"k_max", r->k_max},
                  {"spectral_gap", r->spectral_gap},
                  {"entries", r->entries},
                  {"excluded", r->excluded},
                  {"min_ratio", r->min_ratio},
                  {"max_ratio", r->max_ratio},
                  {"k1", rows}};
  }
  return j.dump(2);
}

std::string checkpoint_metadata(const RunConfig& cfg, const ModelConfig& model, const Stamp& stamp) {
  json j = stamp_json(stamp);
  j["config"] = serialize_run_config(cfg);
  j["in_features"] = model.in_features;
  j["classes"] = model.classes;
  return j.dump();
}

CheckpointInfo parse_checkpoint_metadata(const std::string& metadata) {
  CheckpointInfo info;
  try {
    const json j = json::parse(metadata);
    info.config = parse_run_config(j.at("config").get<std::string>(), "checkpoint metadata");
    info.model = info.config.model;
    info.model.in_features = j.at("in_features").get<std::size_t>();
    info.model.classes = j.at("classes").get<std::size_t>();
    info.seed = j.at("seed").get<std::uint64_t>();
    info.config_hash = j.at("config_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw validation_error(std::string("checkpoint metadata: ") + e.what());
  }
  return info;
}

std::string gpr_dump_json(const Checkpoint& ckpt, const Stamp& stamp) {
  const CheckpointInfo info = parse_checkpoint_metadata(ckpt.metadata);
  json j = stamp_json(stamp);
  j["checkpoint_seed"] = info.seed;
  j["checkpoint_config_hash"] = info.config_hash;
  const auto alpha = require(ckpt, "sta.gpr_weights").values();
  j["gpr_weights"] = std::vector<double>(alpha.begin(), alpha.end());
  j["gate"] = to_string(info.model.sta.gate);
  if (info.model.sta.hops > 0) j["gates"] = matrix_json(require(ckpt, "sta.gates"));
  j["effective_gates"] = matrix_json(effective_from_checkpoint(ckpt, info.model.sta));
  if (const Matrix* t = ckpt.find("sta.alpha_t")) j["alpha_t"] = (*t)(0, 0);
  return j.dump(2);
}

std::string gpr_dump_csv(const Checkpoint& ckpt) {
  const CheckpointInfo info = parse_checkpoint_metadata(ckpt.metadata);
  const Matrix& alpha = require(ckpt, "sta.gpr_weights");
  const Matrix eff = effective_from_checkpoint(ckpt, info.model.sta);
  std::ostringstream out;
  out << std::setprecision(17) << "hop,alpha";
  for (std::size_t h = 0; h < info.model.sta.heads; ++h) out << ",head" << h;
  out << '\n';
  for (std::size_t k = 0; k < alpha.cols(); ++k) {
    out << k << ',' << alpha(0, k);
    for (std::size_t h = 0; h < info.model.sta.heads; ++h) {
      out << ',' << (k == 0 || k > eff.rows() ? 1.0 : eff(k - 1, h));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace sta
