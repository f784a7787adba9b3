#pragma once

// Reality-principle gate and the distance-softmax recommendation layer.

#include <cstddef>
#include <vector>

#include "fanc/model.hpp"

namespace fanc {

template <class T>
struct DecisionOutput {
  T state;
  T gate;
};

/// gate * (P c) + (1 - gate) * u. With ablate_conscious_only the gate is
/// fixed to ones and the state is exactly P c.
template <class T>
DecisionOutput<T> decision_state(const DecisionWeights<T>& w, const T& conscious, const T& u,
                                 bool ablate_conscious_only) {
  T projected = affine(w.projection, conscious);
  if (ablate_conscious_only) {
    T gate = ones_like(projected);
    return {std::move(projected), std::move(gate)};
  }
  T gate = logistic(affine(w.gate_input, conscious) + affine(w.gate_recurrent, u));
  T state = interpolate(gate, projected, u);
  return {std::move(state), std::move(gate)};
}

struct RecommendationDistribution {
  Array probs;                      // sums to 1
  std::vector<std::size_t> ranked;  // descending prob, ties by ascending index
  Array sq_distances;

  /// 1-based position of item in `ranked`.
  std::size_t rank_of(std::size_t item) const;
  /// -log probs[item], evaluated from the distances so it stays finite when
  /// probs[item] underflows.
  double neg_log_prob(std::size_t item) const;
};

/// p_i proportional to exp(-|d - e_i|^2), max-subtracted. The ranking is taken
/// from the distances so that probabilities underflowing to 0 still order.
RecommendationDistribution score_items(const Array& d, const Array& embeddings);

/// k nearest items, ascending distance, ties by ascending index.
std::vector<std::size_t> recommend_top_k(const Array& d, const Array& embeddings, std::size_t k);

}  // namespace fanc
