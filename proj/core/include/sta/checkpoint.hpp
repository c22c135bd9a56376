#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sta/matrix.hpp"

namespace sta {

// Binary layout (all integers little-endian):
//   "STACKPT" '\0'      8-byte magic
//   u8                  format version
//   u32 + bytes         metadata (free-form UTF-8, JSON by convention)
//   u32                 tensor count
//   per tensor: u32 + bytes name, u64 rows, u64 cols, rows*cols f64 payload
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Matrix value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct Checkpoint {
  std::string metadata;
  std::vector<NamedTensor> tensors;

  const Matrix* find(const std::string& name) const;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace sta
