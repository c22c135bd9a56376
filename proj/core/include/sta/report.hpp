#pragma once

#include <cstdint>
#include <string>

#include "sta/checkpoint.hpp"
#include "sta/config.hpp"
#include "sta/theory.hpp"
#include "sta/train.hpp"

namespace sta {

// Reproducibility header carried by every emitted document.
struct Stamp {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_hash;
};

Stamp make_stamp(const std::string& command, const RunConfig& cfg);

std::string train_report_json(const TrainReport& report, const RunConfig& cfg, const ModelConfig& model,
                              const Stamp& stamp);

// Either report may be null.
std::string theorem_report_json(const ConvergenceReport* mixing, const RatioReport* ratio, const Stamp& stamp);

// Metadata written into a checkpoint: the serialized RunConfig plus the
// resolved input width and class count.
std::string checkpoint_metadata(const RunConfig& cfg, const ModelConfig& model, const Stamp& stamp);

struct CheckpointInfo {
  RunConfig config;
  ModelConfig model;
  std::uint64_t seed = 0;
  std::string config_hash;
};
CheckpointInfo parse_checkpoint_metadata(const std::string& metadata);

// alpha_k, raw gates and effective head weights stored in a checkpoint.
std::string gpr_dump_json(const Checkpoint& ckpt, const Stamp& stamp);
std::string gpr_dump_csv(const Checkpoint& ckpt);

}  // namespace sta
