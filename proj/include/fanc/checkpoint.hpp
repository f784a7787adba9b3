#pragma once

// Binary checkpoint:
//   "FANC" | version byte | u32 LE header length | header text | arrays
// The header lists dims, counters and every array as "array <name> <dims...>"
// in file order; arrays follow as raw little-endian float64.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fanc/errors.hpp"
#include "fanc/model.hpp"
#include "fanc/training.hpp"

namespace fanc {

inline constexpr std::uint8_t kCheckpointVersion = 1;

class CheckpointError : public DataError {
 public:
  using DataError::DataError;
};

struct Checkpoint {
  ModelParameters model;
  AdamState moments;
  std::uint64_t epoch = 0;
  std::vector<double> validation_history;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

}  // namespace fanc
