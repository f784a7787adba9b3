#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fanc/errors.hpp"
#include "fanc/evaluation.hpp"
#include "fanc/training.hpp"
#include "support.hpp"

using namespace fanc;

namespace {

BehaviourSequence seq(std::vector<std::size_t> items) {
  BehaviourSequence s;
  s.id = "s";
  double t = 0.0;
  for (auto i : items) {
    s.steps.push_back({i, t});
    t += 0.5;
  }
  return s;
}

std::vector<std::size_t> identity_ranking(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

}  // namespace

TEST_CASE("recall and ndcg examples") {
  const std::vector<std::size_t> ranked{3, 1, 2};
  CHECK(recall_at_k(ranked, 2, 2) == 0.0);
  CHECK(recall_at_k(ranked, 2, 3) == 1.0);
  CHECK(recall_at_k(ranked, 3, 1) == 1.0);
  CHECK(ndcg_at_k(ranked, 3, 1) == 1.0);
  CHECK(ndcg_at_k(ranked, 1, 2) == doctest::Approx(0.6309297).epsilon(1e-7));
  CHECK(ndcg_at_k(ranked, 2, 2) == 0.0);
  CHECK(ndcg_at_k(ranked, 2, 3) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("metrics: monotone in k and recall bounds ndcg") {
  testing::Gen g(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + g.index(30);
    auto ranked = identity_ranking(n);
    std::shuffle(ranked.begin(), ranked.end(), g.engine());
    const std::size_t target = g.index(n);
    for (std::size_t k = 1; k < n; ++k) {
      CHECK(recall_at_k(ranked, target, k) <= recall_at_k(ranked, target, k + 1));
      CHECK(ndcg_at_k(ranked, target, k) <= ndcg_at_k(ranked, target, k + 1));
      CHECK(ndcg_at_k(ranked, target, k) <= recall_at_k(ranked, target, k));
    }
    CHECK(recall_at_k(ranked, target, n) == 1.0);
  }
}

TEST_CASE("metrics are invariant to relabelling items") {
  testing::Gen g(2);
  const std::size_t n = 12;
  std::vector<BehaviourSequence> data;
  for (int i = 0; i < 20; ++i) data.push_back(g.sequence(n, 5, 0.1, 1.0));
  auto perm = identity_ranking(n);
  std::shuffle(perm.begin(), perm.end(), g.engine());
  auto relabelled = data;
  for (auto& s : relabelled)
    for (auto& st : s.steps) st.item = perm[st.item];
  const TransitionModel fmc(data, n, 0.5);
  const Ranker original = [&](const BehaviourSequence& s, std::size_t j) {
    return fmc.rank(s.steps[j].item);
  };
  // The relabelled ranker ranks the same items under their new labels.
  const Ranker mapped = [&](const BehaviourSequence& s, std::size_t j) {
    std::vector<std::size_t> inverse(n);
    for (std::size_t i = 0; i < n; ++i) inverse[perm[i]] = i;
    auto r = fmc.rank(inverse[s.steps[j].item]);
    for (auto& i : r) i = perm[i];
    return r;
  };
  const auto a = evaluate_ranker(original, data, {1, 3, 5}, n);
  const auto b = evaluate_ranker(mapped, relabelled, {1, 3, 5}, n);
  CHECK(a.predictions == b.predictions);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].recall == b.rows[i].recall);
    CHECK(a.rows[i].ndcg == b.rows[i].ndcg);
  }
}

TEST_CASE("perfect and random rankers") {
  testing::Gen g(3);
  const std::size_t n = 20;
  std::vector<BehaviourSequence> data;
  for (int i = 0; i < 400; ++i) data.push_back(g.sequence(n, 6, 0.1, 1.0));
  const Ranker perfect = [&](const BehaviourSequence& s, std::size_t j) {
    auto r = identity_ranking(n);
    std::swap(r[0], r[s.steps[j + 1].item]);
    return r;
  };
  const auto best = evaluate_ranker(perfect, data, {1, 10}, n);
  CHECK(best.at(1).recall == 1.0);
  CHECK(best.at(1).ndcg == 1.0);
  CHECK(best.predictions == 400 * 5);

  const Ranker random = [&](const BehaviourSequence&, std::size_t) {
    auto r = identity_ranking(n);
    std::shuffle(r.begin(), r.end(), g.engine());
    return r;
  };
  const auto chance = evaluate_ranker(random, data, {1, 5, 10}, n);
  for (std::size_t k : {1u, 5u, 10u}) {
    const double p = static_cast<double>(k) / n;
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(chance.predictions));
    CHECK(std::abs(chance.at(k).recall - p) < 3 * se);
  }
}

TEST_CASE("metrics accumulator contract") {
  CHECK_THROWS_AS(MetricsAccumulator({0}, 5), ContractViolation);
  CHECK_THROWS_AS(MetricsAccumulator({6}, 5), ContractViolation);
  MetricsAccumulator acc({5, 1, 5}, 5);
  const auto t = acc.table();
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].k == 1);
  CHECK(t.rows[1].k == 5);
}

TEST_CASE("popularity baseline") {
  std::vector<BehaviourSequence> train{seq({0, 0, 0, 1, 2}), seq({0, 0, 2, 2})};
  CHECK(popularity_baseline(train, 3) == std::vector<std::size_t>{0, 2, 1});
  // Ties by lower index; unseen items last.
  CHECK(popularity_baseline({seq({3, 1})}, 5) == std::vector<std::size_t>{1, 3, 0, 2, 4});
}

TEST_CASE("transition baseline") {
  const std::vector<BehaviourSequence> train{seq({0, 1}), seq({0, 1}), seq({0, 2})};
  const TransitionModel exact(train, 4, 0.0);
  CHECK(exact.count(0, 1) == 2.0);
  const auto p = exact.probabilities(0);
  CHECK(p[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(p[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(exact.rank(0) == std::vector<std::size_t>{1, 2, 0, 3});
  // Never left item 3: uniform.
  CHECK(exact.rank(3) == std::vector<std::size_t>{0, 1, 2, 3});
  const TransitionModel smooth(train, 4, 0.01);
  CHECK(smooth.rank(3) == std::vector<std::size_t>{0, 1, 2, 3});
  const auto ps = smooth.probabilities(1);
  for (double v : ps) CHECK(v == doctest::Approx(0.25));

  const TransitionModel two({seq({0, 0})}, 2, 1.0);
  const auto q = two.probabilities(1);
  CHECK(q[0] == 0.5);
  CHECK(q[1] == 0.5);
}

TEST_CASE("evaluate agrees with the traced ranking and is thread independent") {
  testing::Gen g(4);
  const auto model = g.model({9, 4, 3});
  std::vector<BehaviourSequence> data;
  for (int i = 0; i < 7; ++i) data.push_back(g.sequence(9, 5, 0.1, 1.5));
  const ForwardOptions opts;
  const auto a = evaluate(model, data, {1, 3, 9}, opts, 1);
  const auto b = evaluate(model, data, {1, 3, 9}, opts, 3);
  const Ranker traced = [&](const BehaviourSequence& s, std::size_t j) {
    return forward_sequence(model, s, opts).steps[j].distribution.ranked;
  };
  const auto c = evaluate_ranker(traced, data, {1, 3, 9}, 9);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.rows[i].recall == b.rows[i].recall);
    CHECK(a.rows[i].ndcg == c.rows[i].ndcg);
  }
  CHECK(a.at(9).recall == 1.0);
}

TEST_CASE("what-if at the observed interval matches the standard recommendation") {
  testing::Gen g(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto model = g.model({10, 4, 3});
    const auto s = g.sequence(10, 5, 0.1, 1.5);
    const ForwardOptions opts;
    const double dt = s.interval(s.size() - 2);
    const auto rows = whatif_sweep(model, s, {0.2, dt}, 4, opts, 1.5);
    const auto ranked = forward_sequence(model, s, opts).steps.back().distribution.ranked;
    CHECK(rows[1].top_k == std::vector<std::size_t>(ranked.begin(), ranked.begin() + 4));
  }
}

TEST_CASE("what-if rows coincide without gravity or velocity") {
  testing::Gen g(6);
  auto model = g.model({8, 3, 2});
  model.weights.log_mass = Array(Shape(8), -200.0);
  // Zero projection of the velocity half keeps v = 0 after the shift.
  for (std::size_t r = 3; r < 6; ++r)
    for (std::size_t c = 0; c < 2; ++c) model.weights.shift.projection(r, c) = 0.0;
  const auto s = seq({1, 2, 3, 4});
  // From h_prev = 0 the first shift leaves v = 0.
  const auto first_only = seq({1, 2});
  const auto rows = whatif_sweep(model, first_only, {0.25, 0.5, 1.0, 1.5}, 8, ForwardOptions{}, 1.5);
  for (const auto& r : rows) CHECK(r.top_k == rows[0].top_k);
  CHECK_THROWS_AS(whatif_sweep(model, s, {0.0}, 3, ForwardOptions{}, 1.5), ContractViolation);
  CHECK_THROWS_AS(whatif_sweep(model, s, {1.6}, 3, ForwardOptions{}, 1.5), ContractViolation);
}

TEST_CASE("pleasure/reality report") {
  testing::Gen g(7);
  const auto model = g.model({8, 4, 3});
  std::vector<BehaviourSequence> data;
  for (int i = 0; i < 5; ++i) data.push_back(g.sequence(8, 5, 0.1, 1.5));
  ForwardOptions opts;
  for (const auto& r : pleasure_reality_report(model, data, opts)) {
    CHECK(r.mean_gate > 0.0);
    CHECK(r.mean_gate < 1.0);
    CHECK(r.mean_displacement > 0.0);
  }
  opts.ablate_conscious_only = true;
  for (const auto& r : pleasure_reality_report(model, data, opts)) CHECK(r.mean_gate == 1.0);

  auto massless = model;
  massless.weights.log_mass = Array(Shape(8), -300.0);
  for (std::size_t r = 4; r < 8; ++r)
    for (std::size_t c = 0; c < 3; ++c) massless.weights.shift.projection(r, c) = 0.0;
  // One step from rest: v = 0 after the shift and the field is negligible.
  const auto rows = pleasure_reality_report(massless, {seq({1, 2})}, ForwardOptions{});
  CHECK(rows[0].mean_displacement < 1e-100);
}

TEST_CASE("csv writers") {
  MetricsTable t{{{1, 0.5, 0.5}, {5, 1.0, 0.75}}, 8};
  std::ostringstream m;
  write_metrics_csv(m, "fanc", t);
  CHECK(m.str() == "model,k,recall,ndcg,predictions\nfanc,1,0.5,0.5,8\nfanc,5,1,0.75,8\n");
  std::ostringstream w;
  write_whatif_csv(w, ItemCatalog::numbered(3), {{0.5, {2, 0}}});
  CHECK(w.str() == "delta_t,rank,item_id\n0.5,1,2\n0.5,2,0\n");
  std::ostringstream p;
  write_pleasure_reality_csv(p, {{"u1", 0.25, 0.5}});
  CHECK(p.str() == "sequence_id,mean_displacement,mean_decision_gate\nu1,0.25,0.5\n");
}
