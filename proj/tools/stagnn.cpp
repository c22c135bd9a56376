#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sta/bench.hpp"
#include "sta/checkpoint.hpp"
#include "sta/config.hpp"
#include "sta/dataset.hpp"
#include "sta/error.hpp"
#include "sta/oracle.hpp"
#include "sta/report.hpp"
#include "sta/spectral.hpp"
#include "sta/theory.hpp"
#include "sta/train.hpp"

namespace fs = std::filesystem;
using namespace sta;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> k;
  std::optional<std::size_t> heads;
  std::optional<std::string> hops;
  std::optional<double> lr;
  std::optional<std::string> dataset;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "RunConfig file");
  cmd->add_option("--seed", o.seed, "Seed for data, splits, init and dropout");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--k", o.k, "Subtree height K");
  cmd->add_option("--heads", o.heads, "Attention heads H");
  cmd->add_option("--hops", o.hops, "Global-attention hops h for the GA+STA variant, or 'none'");
  cmd->add_option("--lr", o.lr, "Learning rate");
  cmd->add_option("--dataset", o.dataset, "'sbm' or edges,features,labels paths");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) cfg.set_seed(*o.seed);
  if (o.out) cfg.out = *o.out;
  if (o.k) cfg.model.sta.hops = *o.k;
  if (o.heads) cfg.model.sta.heads = *o.heads;
  if (o.hops) {
    if (*o.hops == "none") {
      cfg.model.global_hops.reset();
    } else {
      try {
        cfg.model.global_hops = static_cast<std::size_t>(std::stoull(*o.hops));
      } catch (const std::exception&) {
        throw validation_error("--hops expects an integer or 'none'");
      }
    }
  }
  if (o.lr) cfg.train.lr = *o.lr;
  if (o.dataset) {
    if (*o.dataset == "sbm") {
      cfg.dataset.source = "sbm";
    } else {
      const auto first = o.dataset->find(',');
      const auto second = first == std::string::npos ? first : o.dataset->find(',', first + 1);
      if (second == std::string::npos) throw validation_error("--dataset expects 'sbm' or edges,features,labels");
      cfg.dataset.source = "files";
      cfg.dataset.edges = o.dataset->substr(0, first);
      cfg.dataset.features = o.dataset->substr(first + 1, second - first - 1);
      cfg.dataset.labels = o.dataset->substr(second + 1);
    }
  }
  cfg.validate();
  return cfg;
}

Dataset load(const RunConfig& cfg) {
  if (cfg.dataset.source == "sbm") return synth_sbm(cfg.dataset.sbm);
  return load_dataset(cfg.dataset.edges, cfg.dataset.features, cfg.dataset.labels);
}

fs::path ensure_out(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) throw io_error("cannot write '" + path.string() + "'");
}

std::string header(const Stamp& s) {
  return s.command + " seed=" + std::to_string(s.seed) + " config_hash=" + s.config_hash;
}

int cmd_train(const Overrides& o) {
  const RunConfig cfg = resolve(o);
  const Stamp stamp = make_stamp("train", cfg);
  const Dataset data = load(cfg);
  for (NodeId i : data.graph.isolated_nodes()) std::cerr << "warning: isolated node " << i << " given a self-loop\n";
  const Splits splits = make_splits(data.num_nodes(), cfg.train.split, cfg.seed);
  ModelConfig model = cfg.model;
  model.classes = data.num_classes;
  const TrainResult result = train(data.graph, data.features, data.labels, splits, model, cfg.train);
  for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << '\n';

  const fs::path dir = ensure_out(cfg);
  write_text(dir / "train_report.json", train_report_json(result.report, cfg, result.model, stamp));
  StagnnParams best = result.best_params;
  write_checkpoint(dir / "model.ckpt", make_checkpoint(result.model, best, checkpoint_metadata(cfg, result.model, stamp)));

  std::cout << header(stamp) << '\n'
            << "best_epoch=" << result.report.best_epoch << " val=" << result.report.best_val_metric
            << " test=" << result.report.test_metric_at_best << " epochs=" << result.report.epochs_run
            << " seconds=" << result.report.wall_seconds << '\n'
            << "wrote " << (dir / "train_report.json").string() << " and " << (dir / "model.ckpt").string() << '\n';
  return 0;
}

int cmd_eval(const Overrides& o, const std::string& checkpoint, const std::string& split) {
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  CheckpointInfo info = parse_checkpoint_metadata(ckpt.metadata);
  RunConfig cfg = info.config;
  Overrides local = o;
  if (local.config.empty()) {
    // Only dataset and output location may be redirected; the model is fixed.
    if (local.dataset) {
      Overrides probe;
      probe.dataset = local.dataset;
      cfg.dataset = resolve(probe).dataset;
    }
    if (local.out) cfg.out = *local.out;
  } else {
    throw validation_error("eval: the configuration comes from the checkpoint; --config is not accepted");
  }
  const Stamp stamp{"eval", info.seed, info.config_hash};
  const Dataset data = load(cfg);
  const Splits splits = make_splits(data.num_nodes(), cfg.train.split, info.seed);
  std::size_t pe = cfg.train.pe_dims;
  if (data.num_nodes() > kMaxSpectralNodes) pe = 0;
  if (pe >= data.num_nodes()) pe = data.num_nodes() > 1 ? data.num_nodes() - 1 : 0;
  const Matrix inputs = with_positional_encoding(data.graph, data.features, pe);

  Rng unused(0);
  StagnnParams params = StagnnParams::init(info.model, unused);
  load_parameters(ckpt, params);
  const Matrix logits = predict(data.graph, info.model, params, inputs);
  const auto& mask = split == "train" ? splits.train : split == "val" ? splits.val : splits.test;
  const double score = evaluate(logits, data.labels, mask, cfg.train.metric);
  std::cout << header(stamp) << '\n'
            << "split=" << split << " metric=" << to_string(cfg.train.metric) << " value=" << score << '\n';
  return 0;
}

int cmd_oracle(const Overrides& o) {
  const RunConfig cfg = resolve(o);
  const Stamp stamp = make_stamp("oracle-check", cfg);
  const OracleSweepResult r = run_oracle_sweep(cfg.oracle, cfg.seed);
  std::cout << header(stamp) << '\n';
  for (const auto& c : r.cases) {
    std::cout << "N=" << c.nodes << " E=" << c.edges << " K=" << c.hops << " H=" << c.heads
              << " max_dev=" << c.max_deviation << '\n';
  }
  std::cout << "cases=" << r.cases.size() << " max_deviation=" << r.max_deviation << " tolerance=" << cfg.oracle.tolerance
            << (r.passed ? " PASS" : " FAIL") << '\n';
  return r.passed ? 0 : 2;
}

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

int cmd_theorem(const Overrides& o) {
  const RunConfig cfg = resolve(o);
  const Stamp stamp = make_stamp("verify-theorem1", cfg);
  Graph g;
  if (cfg.dataset.source == "files") {
    g = load(cfg).graph;
  } else {
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt == 100) throw validation_error("verify-theorem1: no non-bipartite sample in 100 attempts");
      Rng rng = Rng::derive(cfg.seed, attempt);
      g = random_connected_graph(cfg.theorem.nodes, cfg.theorem.edge_prob, rng);
      if (!is_bipartite(g)) break;
    }
  }
  const ConvergenceReport mixing = verify_mixing(g, cfg.theorem.k_max, cfg.theorem.epsilons);

  Rng rng = Rng::derive(cfg.seed, 1000);
  const std::size_t n = g.num_nodes();
  const Matrix q = gaussian(n, 4, rng);
  const Matrix k = gaussian(n, 4, rng);
  Matrix v(n, 4);
  for (double& x : v.values()) x = rng.uniform();
  const RatioReport ratio = verify_sta_sa_ratio(g, q, k, v, cfg.theorem.k_max, cfg.theorem.etas);

  const fs::path dir = ensure_out(cfg);
  write_text(dir / "theorem1.json", theorem_report_json(&mixing, &ratio, stamp));

  bool ok = mixing.rigorous_violations == 0;
  std::cout << header(stamp) << '\n'
            << "N=" << n << " gap=" << mixing.spectral_gap << " rigorous_violations=" << mixing.rigorous_violations
            << " exp_curve_violations=" << mixing.exp_violations << '\n';
  for (const auto& row : mixing.mixing_times) {
    const bool decisive = row.predicted <= mixing.k_max;
    ok = ok && (!decisive || row.within_prediction);
    std::cout << "eps=" << row.epsilon << " K0=" << (row.measured ? std::to_string(*row.measured) : "none")
              << " predicted=" << row.predicted << (decisive ? "" : " (beyond k_max)") << '\n';
  }
  std::cout << "ratio entries=" << ratio.entries << " excluded=" << ratio.excluded << '\n';
  for (const auto& row : ratio.bands) {
    ok = ok && row.violations_after_prediction == 0;
    std::cout << "eta=" << row.eta << " K1=" << (row.measured ? std::to_string(*row.measured) : "none")
              << " predicted=" << row.predicted << " violations_after_prediction=" << row.violations_after_prediction
              << (row.predicted <= ratio.k_max ? "" : " (beyond k_max)") << '\n';
  }
  std::cout << "wrote " << (dir / "theorem1.json").string() << (ok ? " PASS" : " FAIL") << '\n';
  return ok ? 0 : 2;
}

int cmd_bench(const Overrides& o) {
  const RunConfig cfg = resolve(o);
  const Stamp stamp = make_stamp("bench", cfg);
  const auto rows = run_bench_suite(cfg.bench, cfg.seed);
  const fs::path dir = ensure_out(cfg);
  std::ofstream csv(dir / "bench.csv");
  if (!csv) throw io_error("cannot write '" + (dir / "bench.csv").string() + "'");
  csv << "# " << header(stamp) << '\n';
  write_bench_csv(csv, rows);
  std::cout << header(stamp) << '\n';
  write_bench_csv(std::cout, rows);
  return 0;
}

int cmd_gpr(const Overrides& o, const std::string& checkpoint) {
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  const CheckpointInfo info = parse_checkpoint_metadata(ckpt.metadata);
  RunConfig cfg = info.config;
  if (o.out) cfg.out = *o.out;
  const Stamp stamp{"gpr-dump", info.seed, info.config_hash};
  const fs::path dir = ensure_out(cfg);
  const std::string json = gpr_dump_json(ckpt, stamp);
  write_text(dir / "gpr.json", json);
  write_text(dir / "gpr.csv", gpr_dump_csv(ckpt));
  std::cout << json << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stagnn: subtree attention graph networks"};
  app.require_subcommand(1);

  Overrides train_o, eval_o, oracle_o, theorem_o, bench_o, gpr_o;
  std::string eval_ckpt, eval_split = "test", gpr_ckpt;

  auto* train_cmd = app.add_subcommand("train", "Train STAGNN; writes train_report.json and model.ckpt");
  add_common(train_cmd, train_o);
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on a split");
  add_common(eval_cmd, eval_o);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval_cmd->add_option("--split", eval_split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Efficient STA against the dense oracle on random graphs");
  add_common(oracle_cmd, oracle_o);
  auto* theorem_cmd = app.add_subcommand("verify-theorem1", "Mixing bounds and the STA/SA ratio band");
  add_common(theorem_cmd, theorem_o);
  auto* bench_cmd = app.add_subcommand("bench", "Timing sweeps over |E|, N and K; writes bench.csv");
  add_common(bench_cmd, bench_o);
  auto* gpr_cmd = app.add_subcommand("gpr-dump", "Extract GPR weights and gates from a checkpoint");
  add_common(gpr_cmd, gpr_o);
  gpr_cmd->add_option("--checkpoint", gpr_ckpt, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::Validation);
  }

  try {
    if (*train_cmd) return cmd_train(train_o);
    if (*eval_cmd) return cmd_eval(eval_o, eval_ckpt, eval_split);
    if (*oracle_cmd) return cmd_oracle(oracle_o);
    if (*theorem_cmd) return cmd_theorem(theorem_o);
    if (*bench_cmd) return cmd_bench(bench_o);
    if (*gpr_cmd) return cmd_gpr(gpr_o, gpr_ckpt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Numerical);
  }
  return 0;
}
