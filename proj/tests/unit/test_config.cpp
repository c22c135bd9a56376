#include <doctest.h>

#include "sta/config.hpp"
#include "sta/error.hpp"

using namespace sta;

namespace {

std::string message_of(std::string_view text) {
  try {
    (void)parse_run_config(text, "cfg");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const RunConfig c;
    CHECK(c.model.sta.hops == 5);
    CHECK(c.model.sta.hidden == 64);
    CHECK(c.train.lr == 0.01);
    CHECK(c.train.weight_decay == 5e-4);
    CHECK(c.oracle.graphs == 50);
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("parse then serialize round trips") {
    const RunConfig c = parse_run_config(R"(
[run]
seed = 7
out = results   # comment

[model]
hops = 10
heads = 4
gate = raw
aggregation = concat
global_hops = 3

[train]
lr = 0.005
metric = roc_auc
patience = 20

[dataset]
source = files
edges = a.txt
features = b.csv
labels = c.txt
)");
    CHECK(c.seed == 7);
    CHECK(c.train.seed == 7);
    CHECK(c.dataset.sbm.seed == 7);
    CHECK(c.out == "results");
    CHECK(c.model.sta.gate == GateMode::RawGate);
    CHECK(c.model.sta.aggregation == Aggregation::Concat);
    CHECK(c.model.global_hops == std::optional<std::size_t>(3));
    CHECK(c.train.metric == Metric::RocAuc);
    CHECK(parse_run_config(serialize_run_config(c)) == c);
    CHECK(config_hash(parse_run_config(serialize_run_config(c))) == config_hash(c));
  }

  TEST_CASE("hash tracks content") {
    RunConfig a, b;
    CHECK(config_hash(a) == config_hash(b));
    b.model.sta.hops = 6;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(hash_hex(0x1f).size() == 16);
  }

  TEST_CASE("errors carry line numbers") {
    CHECK(message_of("[model]\nbogus = 1\n").find("cfg:2") != std::string::npos);
    CHECK(message_of("[nowhere]\n").find("cfg:1") != std::string::npos);
    CHECK(message_of("[model]\nhops = 2\nhops = 3\n").find("cfg:3") != std::string::npos);
    CHECK(message_of("[model]\nhops = two\n").find("cfg:2") != std::string::npos);
    CHECK(message_of("[model]\ngate = maybe\n").find("cfg:2") != std::string::npos);
    CHECK(message_of("hops = 2\n").find("cfg:1") != std::string::npos);
    CHECK(message_of("[train]\nlr = -1\n") != "");
  }
}
