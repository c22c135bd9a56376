#include "sta/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "sta/error.hpp"

namespace sta {

const char* to_string(GateMode m) {
  switch (m) {
    case GateMode::SoftmaxGate: return "softmax";
    case GateMode::RawGate: return "raw";
    case GateMode::NoGate: return "none";
  }
  return "?";
}

const char* to_string(Aggregation a) {
  switch (a) {
    case Aggregation::Gpr: return "gpr";
    case Aggregation::Sum: return "sum";
    case Aggregation::Concat: return "concat";
    case Aggregation::AttnReadout: return "attn";
  }
  return "?";
}

const char* to_string(Metric m) { return m == Metric::Accuracy ? "accuracy" : "roc_auc"; }

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string fmt(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fmt(std::uint64_t x) { return std::to_string(x); }

double to_double(std::string_view v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("not a number");
  return x;
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("not a non-negative integer");
  return x;
}

std::vector<double> to_list(std::string_view v) {
  std::vector<double> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= v.size(); ++i) {
    if (i == v.size() || v[i] == ',') {
      const auto cell = trim(v.substr(start, i - start));
      if (!cell.empty()) out.push_back(to_double(cell));
      start = i + 1;
    }
  }
  return out;
}

std::string fmt_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt(xs[i]);
  return s;
}

template <typename E, std::size_t N>
E to_enum(std::string_view v, const std::pair<const char*, E> (&table)[N]) {
  for (const auto& [name, value] : table) {
    if (v == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : table) allowed += std::string(allowed.empty() ? "" : "|") + name;
  throw std::invalid_argument("expected one of " + allowed);
}

constexpr std::pair<const char*, GateMode> kGates[] = {
    {"softmax", GateMode::SoftmaxGate}, {"raw", GateMode::RawGate}, {"none", GateMode::NoGate}};
constexpr std::pair<const char*, Aggregation> kAggregations[] = {{"gpr", Aggregation::Gpr},
                                                                  {"sum", Aggregation::Sum},
                                                                  {"concat", Aggregation::Concat},
                                                                  {"attn", Aggregation::AttnReadout}};
constexpr std::pair<const char*, Metric> kMetrics[] = {{"accuracy", Metric::Accuracy}, {"roc_auc", Metric::RocAuc}};

struct Field {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define STA_NUM(sec, name, member, conv)                                                              \
  Field {                                                                                             \
    sec, name, [](RunConfig& c, std::string_view v) { c.member = static_cast<decltype(c.member)>(conv(v)); }, \
        [](const RunConfig& c) { return fmt(c.member); }                                              \
  }
#define STA_STR(sec, name, member)                                                      \
  Field {                                                                               \
    sec, name, [](RunConfig& c, std::string_view v) { c.member = std::string(v); },     \
        [](const RunConfig& c) { return c.member; }                                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"run", "seed", [](RunConfig& c, std::string_view v) { c.set_seed(to_u64(v)); },
            [](const RunConfig& c) { return fmt(c.seed); }},
      STA_STR("run", "out", out),

      STA_STR("dataset", "source", dataset.source),
      STA_STR("dataset", "edges", dataset.edges),
      STA_STR("dataset", "features", dataset.features),
      STA_STR("dataset", "labels", dataset.labels),
      STA_NUM("dataset", "sbm_blocks", dataset.sbm.blocks, to_u64),
      STA_NUM("dataset", "sbm_per_block", dataset.sbm.per_block, to_u64),
      STA_NUM("dataset", "sbm_p_in", dataset.sbm.p_in, to_double),
      STA_NUM("dataset", "sbm_p_out", dataset.sbm.p_out, to_double),
      STA_NUM("dataset", "sbm_signal", dataset.sbm.signal, to_double),

      STA_NUM("model", "hops", model.sta.hops, to_u64),
      STA_NUM("model", "heads", model.sta.heads, to_u64),
      STA_NUM("model", "hidden", model.sta.hidden, to_u64),
      Field{"model", "gate", [](RunConfig& c, std::string_view v) { c.model.sta.gate = to_enum(v, kGates); },
            [](const RunConfig& c) { return std::string(to_string(c.model.sta.gate)); }},
      Field{"model", "aggregation",
            [](RunConfig& c, std::string_view v) { c.model.sta.aggregation = to_enum(v, kAggregations); },
            [](const RunConfig& c) { return std::string(to_string(c.model.sta.aggregation)); }},
      Field{"model", "feature_map",
            [](RunConfig& c, std::string_view v) {
              if (v != "elu_plus_one") throw std::invalid_argument("only elu_plus_one is supported");
              c.model.sta.feature_map = FeatureMapKind::EluPlusOne;
            },
            [](const RunConfig&) { return std::string("elu_plus_one"); }},
      STA_NUM("model", "denominator_epsilon", model.sta.denominator_epsilon, to_double),
      STA_NUM("model", "dropout", model.dropout, to_double),
      Field{"model", "global_hops",
            [](RunConfig& c, std::string_view v) {
              if (v == "none") {
                c.model.global_hops.reset();
              } else {
                c.model.global_hops = static_cast<std::size_t>(to_u64(v));
              }
            },
            [](const RunConfig& c) {
              return c.model.global_hops ? fmt(static_cast<std::uint64_t>(*c.model.global_hops)) : std::string("none");
            }},

      STA_NUM("train", "lr", train.lr, to_double),
      STA_NUM("train", "weight_decay", train.weight_decay, to_double),
      STA_NUM("train", "max_epochs", train.max_epochs, to_u64),
      STA_NUM("train", "patience", train.patience, to_u64),
      STA_NUM("train", "split_train", train.split.train, to_double),
      STA_NUM("train", "split_val", train.split.val, to_double),
      STA_NUM("train", "split_test", train.split.test, to_double),
      Field{"train", "metric", [](RunConfig& c, std::string_view v) { c.train.metric = to_enum(v, kMetrics); },
            [](const RunConfig& c) { return std::string(to_string(c.train.metric)); }},
      STA_NUM("train", "pe_dims", train.pe_dims, to_u64),

      STA_NUM("oracle", "graphs", oracle.graphs, to_u64),
      STA_NUM("oracle", "max_hops", oracle.max_hops, to_u64),
      STA_NUM("oracle", "tolerance", oracle.tolerance, to_double),

      STA_NUM("theorem", "nodes", theorem.nodes, to_u64),
      STA_NUM("theorem", "edge_prob", theorem.edge_prob, to_double),
      STA_NUM("theorem", "k_max", theorem.k_max, to_u64),
      Field{"theorem", "epsilons", [](RunConfig& c, std::string_view v) { c.theorem.epsilons = to_list(v); },
            [](const RunConfig& c) { return fmt_list(c.theorem.epsilons); }},
      Field{"theorem", "etas", [](RunConfig& c, std::string_view v) { c.theorem.etas = to_list(v); },
            [](const RunConfig& c) { return fmt_list(c.theorem.etas); }},

      STA_NUM("bench", "nodes", bench.nodes, to_u64),
      STA_NUM("bench", "degree", bench.degree, to_u64),
      STA_NUM("bench", "hops", bench.hops, to_u64),
      STA_NUM("bench", "dim", bench.dim, to_u64),
      STA_NUM("bench", "dense_nodes", bench.dense_nodes, to_u64),
      STA_NUM("bench", "repeats", bench.repeats, to_u64),
  };
  return table;
}

#undef STA_NUM
#undef STA_STR

}  // namespace

RunConfig::RunConfig() {
  model.sta.hops = 5;
  model.sta.heads = 1;
  model.sta.hidden = 64;
  set_seed(0);
}

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  dataset.sbm.seed = s;
}

void RunConfig::validate() const {
  if (dataset.source != "sbm" && dataset.source != "files") {
    throw validation_error("config: dataset.source must be 'sbm' or 'files'");
  }
  if (dataset.source == "files" && (dataset.edges.empty() || dataset.features.empty() || dataset.labels.empty())) {
    throw validation_error("config: dataset.source = files needs edges, features and labels paths");
  }
  model.sta.validate();
  if (!(model.dropout >= 0.0 && model.dropout < 1.0)) throw validation_error("config: model.dropout must lie in [0, 1)");
  if (model.global_hops && *model.global_hops > model.sta.hops) {
    throw validation_error("config: model.global_hops exceeds model.hops");
  }
  train.validate();
  const auto& r = train.split;
  if (r.train < 0.0 || r.val < 0.0 || r.test < 0.0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
    throw validation_error("config: split ratios must be non-negative and sum to 1");
  }
  if (!(oracle.tolerance > 0.0)) throw validation_error("config: oracle.tolerance must be positive");
  if (bench.repeats == 0) throw validation_error("config: bench.repeats must be positive");
  for (double e : theorem.epsilons) {
    if (!(e > 0.0)) throw validation_error("config: theorem.epsilons must be positive");
  }
  for (double e : theorem.etas) {
    if (!(e > 0.0 && e < 1.0)) throw validation_error("config: theorem.etas must lie in (0, 1)");
  }
}

RunConfig parse_run_config(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
    const std::string at = source + ":" + std::to_string(lineno) + ": ";
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw validation_error(at + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const Field& f : fields()) known = known || section == f.section;
      if (!known) throw validation_error(at + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw validation_error(at + "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) throw validation_error(at + "key '" + key + "' outside any section");
    const Field* field = nullptr;
    for (const Field& f : fields()) {
      if (section == f.section && key == f.key) field = &f;
    }
    if (field == nullptr) throw validation_error(at + "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) throw validation_error(at + "duplicate key '" + key + "'");
    try {
      field->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw validation_error(at + section + "." + key + " = '" + std::string(value) + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (section != f.section) {
      section = f.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_run_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  const auto res = std::to_chars(buf, buf + sizeof buf, h, 16);
  std::string s(buf, res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

}  // namespace sta
