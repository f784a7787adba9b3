#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fanc {

inline constexpr double kSecondsPerWeek = 604800.0;
inline constexpr double kSecondsPerQuarter = 7889400.0;  // 365.25 / 4 days

/// Bijection between external item ids and dense indices [0, N).
class ItemCatalog {
 public:
  /// Index of id, registering it if new.
  std::size_t intern(const std::string& id);
  std::optional<std::size_t> find(const std::string& id) const;
  const std::string& id(std::size_t index) const { return ids_.at(index); }
  std::size_t size() const noexcept { return ids_.size(); }

  /// Items "0".."n-1".
  static ItemCatalog numbered(std::size_t n);

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Interaction {
  std::size_t item = 0;
  double time = 0.0;  // in model time units
  bool operator==(const Interaction&) const = default;
};

struct BehaviourSequence {
  std::string id;
  std::vector<Interaction> steps;

  std::size_t size() const noexcept { return steps.size(); }
  /// t_{j+1} - t_j
  double interval(std::size_t j) const { return steps[j + 1].time - steps[j].time; }
  /// Throws DataError unless times strictly increase, size >= 2 and items < n_items.
  void validate(std::size_t n_items) const;
  bool operator==(const BehaviourSequence&) const = default;
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t sequences_read = 0;
  std::size_t dropped_duplicate_timestamps = 0;
  std::size_t dropped_too_short = 0;
  std::vector<std::string> warnings;
};

struct IngestResult {
  ItemCatalog catalog;
  std::vector<BehaviourSequence> sequences;
  IngestReport report;
};

/// Reads `sequence_id,item_id,timestamp` rows (timestamps in seconds). Drops
/// sequences with repeated timestamps, keeps the most recent max_len + 1
/// interactions of each and rebases times to 0 in units of seconds_per_unit.
IngestResult ingest_csv(std::istream& in, double seconds_per_unit, std::size_t max_len);
IngestResult ingest_csv(const std::filesystem::path& path, double seconds_per_unit,
                        std::size_t max_len);

struct DatasetSplit {
  std::vector<BehaviourSequence> train, valid, test;
  std::uint64_t seed = 0;
};

/// Seeded shuffle, then contiguous train/valid/test partition.
DatasetSplit split(std::vector<BehaviourSequence> sequences,
                   std::array<double, 3> ratios = {0.8, 0.1, 0.1}, std::uint64_t seed = 0);

/// Caps every consecutive interval at max_interval; first time unchanged.
BehaviourSequence clamp_intervals(const BehaviourSequence& sequence, double max_interval = 1.5);
/// Rounds every interval to a positive multiple of step.
BehaviourSequence quantize_intervals(const BehaviourSequence& sequence, double step);

// Prepared-data files.
void write_interactions_csv(std::ostream& out, const ItemCatalog& catalog,
                            const std::vector<BehaviourSequence>& sequences,
                            double seconds_per_unit);
void write_sequences_csv(std::ostream& out, const std::vector<BehaviourSequence>& sequences);
std::vector<BehaviourSequence> read_sequences_csv(std::istream& in, std::size_t n_items);
void write_catalog_csv(std::ostream& out, const ItemCatalog& catalog);
ItemCatalog read_catalog_csv(std::istream& in);

}  // namespace fanc
