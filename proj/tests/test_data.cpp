#include <doctest.h>

#include <set>
#include <sstream>

#include "fanc/data.hpp"
#include "fanc/errors.hpp"
#include "support.hpp"

using namespace fanc;

namespace {

IngestResult ingest(const std::string& text, double spu = 1.0, std::size_t max_len = 10) {
  std::istringstream in(text);
  return ingest_csv(in, spu, max_len);
}

BehaviourSequence seq_with_times(std::initializer_list<double> times) {
  BehaviourSequence s;
  s.id = "s";
  for (double t : times) s.steps.push_back({0, t});
  return s;
}

}  // namespace

TEST_CASE("ingest: one sequence starts at time zero") {
  const auto r = ingest("sequence_id,item_id,timestamp\nu,a,100\nu,b,103\nu,a,110\n");
  REQUIRE(r.sequences.size() == 1);
  const auto& s = r.sequences[0];
  CHECK(s.steps[0].time == 0.0);
  CHECK(s.steps[1].time == 3.0);
  CHECK(s.steps[2].time == 10.0);
  CHECK(r.catalog.size() == 2);
  CHECK(s.steps[0].item == s.steps[2].item);
}

TEST_CASE("ingest: week units") {
  const auto r = ingest("sequence_id,item_id,timestamp\nu,a,0\nu,b,604800\n", kSecondsPerWeek);
  REQUIRE(r.sequences.size() == 1);
  CHECK(r.sequences[0].steps[0].time == 0.0);
  CHECK(r.sequences[0].steps[1].time == 1.0);
  CHECK(kSecondsPerQuarter == 7889400.0);
}

TEST_CASE("ingest: duplicated timestamps drop the whole sequence") {
  const auto r = ingest(
      "sequence_id,item_id,timestamp\n"
      "u,a,1\nu,b,2\nu,c,2\n"
      "v,a,5\nv,b,6\n");
  CHECK(r.report.dropped_duplicate_timestamps == 1);
  REQUIRE(r.sequences.size() == 1);
  CHECK(r.sequences[0].id == "v");
}

TEST_CASE("ingest: rows are sorted by timestamp and short sequences warned about") {
  const auto r = ingest("sequence_id,item_id,timestamp\nu,b,20\nu,a,10\nw,x,3\n");
  REQUIRE(r.sequences.size() == 1);
  CHECK(r.catalog.id(r.sequences[0].steps[0].item) == "a");
  CHECK(r.report.dropped_too_short == 1);
  CHECK(r.report.warnings.size() == 1);
}

TEST_CASE("ingest: keeps the most recent L + 1 interactions") {
  const auto r = ingest("sequence_id,item_id,timestamp\nu,a,1\nu,b,2\nu,c,4\nu,d,7\n", 1.0, 2);
  REQUIRE(r.sequences.size() == 1);
  const auto& s = r.sequences[0];
  REQUIRE(s.size() == 3);
  CHECK(r.catalog.id(s.steps[0].item) == "b");
  CHECK(s.steps[0].time == 0.0);
  CHECK(s.steps[2].time == 5.0);
}

TEST_CASE("ingest: malformed rows name the line") {
  try {
    ingest("sequence_id,item_id,timestamp\nu,a,1\nu,b\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(ingest("sequence_id,item_id,timestamp\nu,a,abc\n"), ParseError);
  CHECK_THROWS_AS(ingest("user,item,time\nu,a,1\n"), ParseError);
}

TEST_CASE("property: ingested sequences satisfy their invariants") {
  testing::Gen g(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::ostringstream csv;
    csv << "sequence_id,item_id,timestamp\n";
    const std::size_t users = 1 + g.index(8);
    for (std::size_t row = 0; row < 60; ++row)
      csv << "u" << g.index(users) << ",item" << g.index(15) << "," << g.index(40) << "\n";
    const auto r = ingest(csv.str(), 2.0, 4);
    for (const auto& s : r.sequences) {
      CHECK_NOTHROW(s.validate(r.catalog.size()));
      CHECK(s.size() <= 5);
      CHECK(s.steps[0].time == 0.0);
    }
    std::set<std::size_t> used;
    for (const auto& s : r.sequences)
      for (const auto& st : s.steps) used.insert(st.item);
    CHECK(used.size() == r.catalog.size());  // catalog covers only surviving items
  }
}

TEST_CASE("split: sizes, determinism and seed sensitivity") {
  testing::Gen g(2);
  std::vector<BehaviourSequence> ten, hundred;
  for (int i = 0; i < 10; ++i) ten.push_back(g.sequence(5, 3, 0.1, 1.0));
  for (int i = 0; i < 100; ++i) hundred.push_back(g.sequence(5, 3, 0.1, 1.0));
  const auto s = split(ten, {0.8, 0.1, 0.1}, 1);
  CHECK(s.train.size() == 8);
  CHECK(s.valid.size() == 1);
  CHECK(s.test.size() == 1);
  CHECK(split(ten, {0.8, 0.1, 0.1}, 1).train == s.train);
  CHECK(split(hundred, {0.8, 0.1, 0.1}, 1).train != split(hundred, {0.8, 0.1, 0.1}, 2).train);
  CHECK_THROWS_AS(split({ten[0], ten[1]}, {0.8, 0.1, 0.1}, 1), DataError);
  CHECK_THROWS(split(ten, {0.5, 0.1, 0.1}, 1));
}

TEST_CASE("property: split partitions are disjoint and exhaustive") {
  testing::Gen g(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<BehaviourSequence> seqs;
    const std::size_t n = 3 + g.index(60);
    for (std::size_t i = 0; i < n; ++i) seqs.push_back(g.sequence(5, 2, 0.1, 1.0));
    const auto s = split(seqs, {0.8, 0.1, 0.1}, trial);
    std::multiset<std::string> ids;
    for (const auto* part : {&s.train, &s.valid, &s.test})
      for (const auto& q : *part) ids.insert(q.id);
    CHECK(ids.size() == n);
    CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == n);
    CHECK(!s.valid.empty());
    CHECK(!s.test.empty());
  }
}

TEST_CASE("clamp_intervals examples and idempotence") {
  const auto same = clamp_intervals(seq_with_times({0, 0.5, 1.4}), 1.5);
  CHECK(same.steps[1].time == 0.5);
  CHECK(same.steps[2].time == 1.4);
  const auto capped = clamp_intervals(seq_with_times({0, 2.0, 2.3}), 1.5);
  CHECK(capped.interval(0) == 1.5);
  CHECK(capped.interval(1) == doctest::Approx(0.3).epsilon(1e-12));
  const auto spread = clamp_intervals(seq_with_times({0, 4, 8}), 1.5);
  CHECK(spread.steps[1].time == 1.5);
  CHECK(spread.steps[2].time == 3.0);
  CHECK(clamp_intervals(seq_with_times({2, 3}), 1.5).steps[0].time == 2.0);
  CHECK_THROWS_AS(clamp_intervals(spread, 0.0), ContractViolation);

  testing::Gen g(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = g.sequence(4, 6, 0.01, 4.0);
    const auto once = clamp_intervals(s, 1.5);
    CHECK(clamp_intervals(once, 1.5) == once);
    for (std::size_t j = 0; j + 1 < once.size(); ++j) CHECK(once.interval(j) <= 1.5 + 1e-12);
  }
}

TEST_CASE("quantize_intervals snaps to positive multiples of the step") {
  const auto q = quantize_intervals(seq_with_times({0, 0.01, 0.23, 1.5}), 0.1);
  CHECK(q.interval(0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(q.interval(1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(q.interval(2) == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("prepared-data files round trip") {
  testing::Gen g(5);
  std::vector<BehaviourSequence> seqs;
  for (int i = 0; i < 5; ++i) seqs.push_back(g.sequence(7, 4, 0.1, 1.5));
  std::stringstream buf;
  write_sequences_csv(buf, seqs);
  CHECK(read_sequences_csv(buf, 7) == seqs);

  const auto catalog = ItemCatalog::numbered(4);
  std::stringstream cbuf;
  write_catalog_csv(cbuf, catalog);
  const auto back = read_catalog_csv(cbuf);
  REQUIRE(back.size() == 4);
  CHECK(back.id(3) == "3");
  CHECK(back.find("2") == std::optional<std::size_t>(2));

  std::stringstream raw;
  write_interactions_csv(raw, ItemCatalog::numbered(7), seqs, kSecondsPerWeek);
  const auto again = ingest_csv(raw, kSecondsPerWeek, 10);
  REQUIRE(again.sequences.size() == seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i)
    for (std::size_t j = 0; j < seqs[i].size(); ++j)
      CHECK(again.sequences[i].steps[j].time == doctest::Approx(seqs[i].steps[j].time).epsilon(1e-12));
}

TEST_CASE("validate rejects broken sequences") {
  CHECK_THROWS_AS(seq_with_times({0}).validate(1), DataError);
  CHECK_THROWS_AS(seq_with_times({0, 0}).validate(1), DataError);
  CHECK_THROWS_AS(seq_with_times({0, 1}).validate(0), DataError);
}
