#include "fanc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "fanc/errors.hpp"

namespace fanc {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_real(std::string_view s, std::size_t line, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

std::size_t parse_index(std::string_view s, std::size_t line, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

void expect_header(std::istream& in, std::string_view expected) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  if (trim(line) != expected)
    throw ParseError(1, "expected header '" + std::string(expected) + "', got '" + line + "'");
}

std::ofstream::fmtflags exact(std::ostream& out) {
  const auto flags = out.flags();
  out << std::setprecision(17);
  return flags;
}

}  // namespace

std::size_t ItemCatalog::intern(const std::string& id) {
  const auto [it, inserted] = index_.try_emplace(id, ids_.size());
  if (inserted) ids_.push_back(id);
  return it->second;
}

std::optional<std::size_t> ItemCatalog::find(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ItemCatalog ItemCatalog::numbered(std::size_t n) {
  ItemCatalog c;
  for (std::size_t i = 0; i < n; ++i) c.intern(std::to_string(i));
  return c;
}

void BehaviourSequence::validate(std::size_t n_items) const {
  if (steps.size() < 2) throw DataError("sequence '" + id + "' has fewer than 2 interactions");
  for (std::size_t j = 0; j < steps.size(); ++j) {
    if (steps[j].item >= n_items)
      throw DataError("sequence '" + id + "': item index " + std::to_string(steps[j].item) +
                      " >= catalog size " + std::to_string(n_items));
    if (!std::isfinite(steps[j].time))
      throw DataError("sequence '" + id + "': non-finite time");
    if (j > 0 && !(steps[j].time > steps[j - 1].time))
      throw DataError("sequence '" + id + "': times not strictly increasing at position " +
                      std::to_string(j));
  }
}

IngestResult ingest_csv(std::istream& in, double seconds_per_unit, std::size_t max_len) {
  FANC_REQUIRE(seconds_per_unit > 0.0, "ingest: seconds_per_unit must be positive");
  FANC_REQUIRE(max_len >= 1, "ingest: max_len must be at least 1");
  expect_header(in, "sequence_id,item_id,timestamp");

  struct Row {
    std::string item;
    double ts;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Row>> groups;
  IngestResult result;

  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 3)
      throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty()) throw ParseError(line_no, "empty id");
    const double ts = parse_real(fields[2], line_no, "timestamp");
    std::string seq(fields[0]);
    auto [it, inserted] = groups.try_emplace(seq);
    if (inserted) order.push_back(seq);
    it->second.push_back({std::string(fields[1]), ts});
    ++result.report.rows;
  }
  result.report.sequences_read = order.size();

  for (const auto& seq_id : order) {
    auto& rows = groups[seq_id];
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.ts < b.ts; });
    bool duplicated = false;
    for (std::size_t j = 1; j < rows.size(); ++j) duplicated = duplicated || rows[j].ts == rows[j - 1].ts;
    if (duplicated) {
      ++result.report.dropped_duplicate_timestamps;
      continue;
    }
    if (rows.size() < 2) {
      ++result.report.dropped_too_short;
      result.report.warnings.push_back("sequence '" + seq_id + "' dropped: fewer than 2 interactions");
      continue;
    }
    const std::size_t keep = std::min(rows.size(), max_len + 1);
    const std::size_t first = rows.size() - keep;
    BehaviourSequence s;
    s.id = seq_id;
    const double t0 = rows[first].ts;
    for (std::size_t j = first; j < rows.size(); ++j)
      s.steps.push_back({result.catalog.intern(rows[j].item), (rows[j].ts - t0) / seconds_per_unit});
    result.sequences.push_back(std::move(s));
  }
  return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, double seconds_per_unit,
                        std::size_t max_len) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return ingest_csv(in, seconds_per_unit, max_len);
}

DatasetSplit split(std::vector<BehaviourSequence> sequences, std::array<double, 3> ratios,
                   std::uint64_t seed) {
  const double total = ratios[0] + ratios[1] + ratios[2];
  FANC_REQUIRE(std::abs(total - 1.0) < 1e-9 && ratios[0] >= 0 && ratios[1] >= 0 && ratios[2] >= 0,
               "split: ratios must be nonnegative and sum to 1");
  const std::size_t n = sequences.size();
  if (n < 3) throw DataError("split: need at least 3 sequences, got " + std::to_string(n));

  std::mt19937_64 rng(seed);
  std::shuffle(sequences.begin(), sequences.end(), rng);

  auto portion = [&](double r) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(r * static_cast<double>(n))));
  };
  const std::size_t n_valid = portion(ratios[1]);
  const std::size_t n_test = portion(ratios[2]);
  const std::size_t n_train = n - n_valid - n_test;

  DatasetSplit out;
  out.seed = seed;
  auto it = std::make_move_iterator(sequences.begin());
  out.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  out.valid.assign(it + static_cast<std::ptrdiff_t>(n_train),
                   it + static_cast<std::ptrdiff_t>(n_train + n_valid));
  out.test.assign(it + static_cast<std::ptrdiff_t>(n_train + n_valid),
                  std::make_move_iterator(sequences.end()));
  return out;
}

BehaviourSequence clamp_intervals(const BehaviourSequence& sequence, double max_interval) {
  FANC_REQUIRE(max_interval > 0.0, "clamp_intervals: max_interval must be positive");
  BehaviourSequence out = sequence;
  for (std::size_t j = 1; j < out.steps.size(); ++j) {
    const double gap = sequence.steps[j].time - sequence.steps[j - 1].time;
    out.steps[j].time = out.steps[j - 1].time + std::min(gap, max_interval);
  }
  return out;
}

BehaviourSequence quantize_intervals(const BehaviourSequence& sequence, double step) {
  FANC_REQUIRE(step > 0.0, "quantize_intervals: step must be positive");
  BehaviourSequence out = sequence;
  for (std::size_t j = 1; j < out.steps.size(); ++j) {
    const double gap = sequence.steps[j].time - sequence.steps[j - 1].time;
    const auto k = std::max<long long>(1, std::llround(gap / step));
    out.steps[j].time = out.steps[j - 1].time + static_cast<double>(k) * step;
  }
  return out;
}

void write_interactions_csv(std::ostream& out, const ItemCatalog& catalog,
                            const std::vector<BehaviourSequence>& sequences,
                            double seconds_per_unit) {
  const auto flags = exact(out);
  out << "sequence_id,item_id,timestamp\n";
  for (const auto& s : sequences)
    for (const auto& step : s.steps)
      out << s.id << ',' << catalog.id(step.item) << ',' << step.time * seconds_per_unit << '\n';
  out.flags(flags);
}

void write_sequences_csv(std::ostream& out, const std::vector<BehaviourSequence>& sequences) {
  const auto flags = exact(out);
  out << "sequence_id,item_index,time\n";
  for (const auto& s : sequences)
    for (const auto& step : s.steps) out << s.id << ',' << step.item << ',' << step.time << '\n';
  out.flags(flags);
}

std::vector<BehaviourSequence> read_sequences_csv(std::istream& in, std::size_t n_items) {
  expect_header(in, "sequence_id,item_index,time");
  std::vector<BehaviourSequence> out;
  std::unordered_map<std::string, std::size_t> where;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 3)
      throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    std::string id(fields[0]);
    auto [it, inserted] = where.try_emplace(id, out.size());
    if (inserted) out.push_back(BehaviourSequence{id, {}});
    out[it->second].steps.push_back(
        {parse_index(fields[1], line_no, "item index"), parse_real(fields[2], line_no, "time")});
  }
  for (const auto& s : out) s.validate(n_items);
  return out;
}

void write_catalog_csv(std::ostream& out, const ItemCatalog& catalog) {
  out << "index,item_id\n";
  for (std::size_t i = 0; i < catalog.size(); ++i) out << i << ',' << catalog.id(i) << '\n';
}

ItemCatalog read_catalog_csv(std::istream& in) {
  expect_header(in, "index,item_id");
  ItemCatalog c;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw ParseError(line_no, "expected 2 fields");
    const std::size_t index = parse_index(fields[0], line_no, "index");
    if (index != c.size()) throw ParseError(line_no, "catalog indices must be contiguous from 0");
    if (c.intern(std::string(fields[1])) != index) throw ParseError(line_no, "duplicate item id");
  }
  return c;
}

}  // namespace fanc
