#include "fanc/decision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fanc/errors.hpp"
#include "ops_detail.hpp"

namespace fanc {
namespace {

std::vector<std::size_t> order_by_distance(const Array& sq) {
  std::vector<std::size_t> order(sq.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sq[a] < sq[b]; });
  return order;
}

}  // namespace

std::size_t RecommendationDistribution::rank_of(std::size_t item) const {
  const auto it = std::find(ranked.begin(), ranked.end(), item);
  FANC_REQUIRE(it != ranked.end(), "rank_of: unknown item " + std::to_string(item));
  return static_cast<std::size_t>(it - ranked.begin()) + 1;
}

double RecommendationDistribution::neg_log_prob(std::size_t item) const {
  FANC_REQUIRE(item < sq_distances.size(), "neg_log_prob: unknown item " + std::to_string(item));
  double smin = sq_distances[0];
  for (double s : sq_distances.values()) smin = std::min(smin, s);
  double z = 0.0;
  for (double s : sq_distances.values()) z += std::exp(-(s - smin));
  return sq_distances[item] - smin + std::log(z);
}

RecommendationDistribution score_items(const Array& d, const Array& embeddings) {
  auto sm = detail::distance_softmax(d, embeddings);
  RecommendationDistribution out;
  out.ranked = order_by_distance(sm.sq_dist);
  out.probs = std::move(sm.probs);
  out.sq_distances = std::move(sm.sq_dist);
  return out;
}

std::vector<std::size_t> recommend_top_k(const Array& d, const Array& embeddings, std::size_t k) {
  FANC_REQUIRE(k >= 1 && k <= embeddings.rows(),
               "recommend_top_k: k=" + std::to_string(k) + " outside [1, " +
                   std::to_string(embeddings.rows()) + "]");
  const auto sm = detail::distance_softmax(d, embeddings);
  auto order = order_by_distance(sm.sq_dist);
  order.resize(k);
  return order;
}

}  // namespace fanc
