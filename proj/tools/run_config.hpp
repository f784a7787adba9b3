#pragma once

// Flat `key = value` configuration shared by every subcommand. Values are
// layered: built-in defaults, then an optional config file, then --key flags.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fanc/training.hpp"

namespace fanc::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  TrainConfig train;
  std::string data = "interactions.csv";
  std::string data_dir = ".";
  std::string out_dir = ".";
  std::string checkpoint;  // empty: <out_dir>/checkpoint.fanc
  double seconds_per_unit = kSecondsPerWeek;
  double train_ratio = 0.8;
  double valid_ratio = 0.1;
  double test_ratio = 0.1;
  std::size_t n_items = 20;
  std::size_t n_sequences = 60;
  std::string split = "test";
  std::string sequence_id;  // empty: first sequence of the split
  std::vector<double> delta_t{0.25, 0.5, 1.0, 1.5};
  std::size_t top_k = 10;
  double fmc_alpha = 0.01;
  bool with_baselines = true;
  double fd_step = 1e-6;
  double tolerance = 1e-4;
  std::string kernels = "auto";

  std::filesystem::path checkpoint_path() const;
};

struct KeySpec {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeySpec>& key_specs();

/// Throws UsageError for an unknown key or a malformed value.
void apply_key(RunConfig& config, const std::string& key, const std::string& value);

/// Reads `key = value` lines; '#' starts a comment.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

std::string format_number(double v);

}  // namespace fanc::cli
