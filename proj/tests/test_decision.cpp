#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fanc/decision.hpp"
#include "fanc/errors.hpp"
#include "support.hpp"

using namespace fanc;

TEST_CASE("decision_state: zero gates average, fixed point, ablation") {
  DecisionWeights<Array> w{Array::matrix(2, 2, {1, 0, 0, 2}), Array::zeros(2, 2), Array::zeros(2, 2)};
  const Array c = Array::vector({1.0, 1.0}), u = Array::vector({3.0, -4.0});
  const auto half = decision_state(w, c, u, false);
  CHECK(half.gate.identical(Array(Shape(2), 0.5)));
  CHECK(half.state.identical(Array::vector({2.0, -1.0})));

  const auto ablated = decision_state(w, c, u, true);
  CHECK(ablated.state.identical(Array::vector({1.0, 2.0})));
  CHECK(ablated.gate.identical(Array(Shape(2), 1.0)));

  testing::Gen g(1);
  DecisionWeights<Array> r{g.matrix(2, 2), g.matrix(2, 2), g.matrix(2, 2)};
  const Array projected = affine(r.projection, c);
  CHECK(max_abs_difference(decision_state(r, c, projected, false).state, projected) < 1e-15);
}

TEST_CASE("property: decision state lies between the projection and u") {
  testing::Gen g(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t du = 1 + g.index(6), dc = 1 + g.index(6);
    DecisionWeights<Array> w{g.matrix(du, dc), g.matrix(du, dc), g.matrix(du, du)};
    const Array c = g.vector(dc), u = g.vector(du, 2.0);
    const Array p = affine(w.projection, c);
    const auto out = decision_state(w, c, u, false);
    for (std::size_t i = 0; i < du; ++i) {
      CHECK(out.gate[i] > 0.0);
      CHECK(out.gate[i] < 1.0);
      CHECK(out.state[i] >= std::min(p[i], u[i]) - 1e-14);
      CHECK(out.state[i] <= std::max(p[i], u[i]) + 1e-14);
    }
  }
}

TEST_CASE("score_items: equidistant items are uniform") {
  const Array e = Array::matrix(4, 2, {1, 0, 0, 1, -1, 0, 0, -1});
  const auto dist = score_items(Array::vector({0.0, 0.0}), e);
  for (double p : dist.probs.values()) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(dist.ranked == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("score_items: two items at squared distances 0 and 1") {
  const auto dist = score_items(Array::vector({0.0}), Array::matrix(2, 1, {0.0, 1.0}));
  const double z = 1.0 + std::exp(-1.0);
  CHECK(dist.probs[0] == doctest::Approx(1.0 / z).epsilon(1e-15));
  CHECK(dist.probs[1] == doctest::Approx(std::exp(-1.0) / z).epsilon(1e-15));
  CHECK(dist.probs[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(dist.probs[1] == doctest::Approx(0.2689).epsilon(1e-4));
  CHECK(dist.rank_of(0) == 1);
  CHECK(dist.rank_of(1) == 2);
  CHECK(dist.neg_log_prob(1) == doctest::Approx(1.3133).epsilon(1e-4));
}

TEST_CASE("score_items: common translation leaves probabilities unchanged") {
  testing::Gen g(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + g.index(8), d = 1 + g.index(4);
    const Array e = g.matrix(n, d), q = g.vector(d), w = g.vector(d, 5.0);
    Array moved = e;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) moved(i, k) += w[k];
    const auto a = score_items(q, e), b = score_items(q + w, moved);
    CHECK(max_abs_difference(a.probs, b.probs) < 1e-10);
  }
}

TEST_CASE("score_items matches the softmax oracle and stays finite for distant items") {
  testing::Gen g(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + g.index(10), d = 1 + g.index(5);
    const Array e = g.matrix(n, d, 10.0), q = g.vector(d, 10.0);
    const auto dist = score_items(q, e);
    const auto expect = testing::oracle::distance_softmax(testing::to_vec(q), testing::to_mat(e));
    CHECK(testing::max_abs_diff(testing::to_vec(dist.probs), expect) < 1e-13);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::isfinite(dist.neg_log_prob(i)));
  }
}

TEST_CASE("recommend_top_k: exact hit, ties and hand-sorted distances") {
  const Array e = Array::matrix(3, 1, {std::sqrt(2.0), std::sqrt(0.5), 1.0});
  CHECK(recommend_top_k(Array::vector({0.0}), e, 2) == std::vector<std::size_t>{1, 2});
  const Array tie = Array::matrix(3, 1, {1.0, -1.0, 5.0});
  CHECK(recommend_top_k(Array::vector({0.0}), tie, 3) == std::vector<std::size_t>{0, 1, 2});
  CHECK(recommend_top_k(Array::vector({5.0}), tie, 1) == std::vector<std::size_t>{2});
  CHECK_THROWS_AS(recommend_top_k(Array::vector({0.0}), tie, 0), ContractViolation);
  CHECK_THROWS_AS(recommend_top_k(Array::vector({0.0}), tie, 4), ContractViolation);
}

TEST_CASE("property: nearest item is the most probable and probabilities sum to one") {
  testing::Gen g(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + g.index(12), d = 1 + g.index(6);
    const Array e = g.matrix(n, d, 1.0 + 3.0 * g.uniform(0, 1)), q = g.vector(d, 2.0);
    const auto dist = score_items(q, e);
    const double sum = std::accumulate(dist.probs.values().begin(), dist.probs.values().end(), 0.0);
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (dist.probs[i] > dist.probs[best]) best = i;
    CHECK(recommend_top_k(q, e, 1)[0] == best);
    CHECK(dist.ranked[0] == best);
    for (double p : dist.probs.values()) CHECK(p <= 1.0);
  }
}
