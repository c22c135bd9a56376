#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "sta/bench.hpp"
#include "sta/dataset.hpp"
#include "sta/oracle.hpp"
#include "sta/report.hpp"

using namespace sta;
using nlohmann::json;

TEST_SUITE("report") {
  TEST_CASE("train report carries the stamp and curves") {
    RunConfig cfg;
    cfg.set_seed(3);
    TrainReport r;
    r.epochs_run = 2;
    r.loss = {1.0, 0.5};
    r.val_metric = {0.5, 0.75};
    r.gpr_weights = {1, 1, 1, 1, 1, 1};
    r.gates = Matrix(5, 1);
    r.effective_gates = Matrix(5, 1, 1.0);
    const json j = json::parse(train_report_json(r, cfg, cfg.model, make_stamp("train", cfg)));
    CHECK(j["seed"] == 3);
    CHECK(j["command"] == "train");
    CHECK(j["config_hash"] == hash_hex(config_hash(cfg)));
    CHECK(j["loss"].size() == 2);
    CHECK(j["gpr_weights"].size() == 6);
    CHECK(j["gates"].size() == 5);
  }

  TEST_CASE("checkpoint metadata and gpr dump") {
    RunConfig cfg;
    cfg.set_seed(11);
    cfg.model.sta.hops = 2;
    cfg.model.sta.heads = 2;
    cfg.model.sta.hidden = 4;
    ModelConfig model = cfg.model;
    model.in_features = 3;
    model.classes = 2;
    Rng rng(1);
    StagnnParams p = StagnnParams::init(model, rng);
    p.sta.gpr_weights.value = Matrix::from_rows({{0.5, 0.25, 0.125}});
    p.sta.gates.value = Matrix::from_rows({{0.0, 0.0}, {std::log(3.0), 0.0}});
    const Stamp stamp = make_stamp("train", cfg);
    const Checkpoint ckpt = make_checkpoint(model, p, checkpoint_metadata(cfg, model, stamp));

    const CheckpointInfo info = parse_checkpoint_metadata(ckpt.metadata);
    CHECK(info.model == model);
    CHECK(info.seed == 11);
    CHECK(info.config == cfg);

    const json j = json::parse(gpr_dump_json(ckpt, make_stamp("gpr-dump", cfg)));
    CHECK(j["gpr_weights"] == json::array({0.5, 0.25, 0.125}));
    CHECK(j["effective_gates"][1][0].get<double>() == doctest::Approx(0.75));
    CHECK(j["checkpoint_seed"] == 11);

    std::istringstream csv(gpr_dump_csv(ckpt));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "hop,alpha,head0,head1");
    std::getline(csv, line);
    CHECK(line == "0,0.5,1,1");
    std::getline(csv, line);
    CHECK(line == "1,0.25,0.5,0.5");

    CHECK_THROWS_AS((void)parse_checkpoint_metadata("not json"), Error);
  }

  TEST_CASE("theorem report") {
    const double eps[] = {1e-2};
    std::vector<Edge> tri{{0, 1}, {1, 2}, {2, 0}};
    const ConvergenceReport m = verify_mixing(Graph::from_edges(tri, 3), 10, eps);
    RunConfig cfg;
    const json j = json::parse(theorem_report_json(&m, nullptr, make_stamp("verify-theorem1", cfg)));
    CHECK(j["mixing"]["max_deviation"].size() == 11);
    CHECK(j["mixing"]["k0"][0]["measured_k0"] == 7);
    CHECK_FALSE(j.contains("ratio"));
  }
}

TEST_SUITE("oracle") {
  TEST_CASE("small sweep matches the dense path") {
    const OracleSweepResult r = run_oracle_sweep({12, 3, 1e-8}, 5);
    CHECK(r.cases.size() == 12);
    CHECK(r.passed);
    CHECK(r.max_deviation < 1e-10);
  }
}

TEST_SUITE("bench") {
  TEST_CASE("median of a known set") {
    int calls = 0;
    (void)median_seconds([&] { ++calls; }, 4);
    CHECK(calls == 5);
  }

  TEST_CASE("round-robin timing calls each function once per repeat with rotating start") {
    std::vector<int> order;
    const auto secs = median_seconds({[&] { order.push_back(0); }, [&] { order.push_back(1); }}, 3);
    CHECK(secs.size() == 2);
    CHECK(order == std::vector<int>{0, 1, 0, 1, 1, 0, 0, 1});
  }

  TEST_CASE("suite layout and csv") {
    BenchOptions o;
    o.nodes = 128;
    o.degree = 4;
    o.hops = 3;
    o.dim = 4;
    o.dense_nodes = 32;
    o.repeats = 1;
    const auto rows = run_bench_suite(o, 1);
    CHECK(rows.size() == 2 + 4 + 3);
    CHECK(rows[1].edges > rows[0].edges);
    const char* node_paths[] = {"dense", "efficient", "dense", "efficient"};
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(rows[2 + i].sweep == "nodes");
      CHECK(rows[2 + i].path == node_paths[i]);
      CHECK(rows[2 + i].nodes == (i < 2 ? 32u : 64u));
    }
    for (std::size_t k = 1; k <= 3; ++k) CHECK(rows[5 + k].hops == k);
    std::ostringstream out;
    write_bench_csv(out, rows);
    CHECK(out.str().rfind("path,sweep,N,E,K,d,seconds\n", 0) == 0);
  }

  TEST_CASE("cost grows with hop count") {
    Rng rng(2);
    const Graph g = random_gnm_graph(2000, 16000, rng);
    const double t1 = time_efficient(g, 1, 16, 1, 3).seconds;
    const double t6 = time_efficient(g, 6, 16, 1, 3).seconds;
    CHECK(t6 > t1);
  }
}
