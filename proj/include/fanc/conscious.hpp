#pragma once

// Conscious path: a bias-free GRU that advances only when an item is consumed.

#include "fanc/model.hpp"

namespace fanc {

template <class T>
T gru_step(const ConsciousWeights<T>& w, const T& c_prev, const T& item) {
  const T update = logistic(affine(w.update_input, item) + affine(w.update_recurrent, c_prev));
  const T reset = logistic(affine(w.reset_input, item) + affine(w.reset_recurrent, c_prev));
  const T candidate = hyperbolic_tangent(affine(w.candidate_input, item) +
                                         affine(w.candidate_recurrent, reset * c_prev));
  return interpolate(update, candidate, c_prev);
}

}  // namespace fanc
