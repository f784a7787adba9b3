#pragma once

// One recurrent step: consume an item, shift the unconscious state, let it float
// for the coming interval, then balance both states into a decision state.

#include <cstddef>

#include "fanc/conscious.hpp"
#include "fanc/decision.hpp"
#include "fanc/model.hpp"
#include "fanc/unconscious.hpp"

namespace fanc {

struct ForwardOptions {
  GravityOptions gravity;
  double steps_per_unit = 10.0;
  bool ablate_conscious_only = false;
};

template <class T>
struct CellStep {
  T conscious;
  T shifted;  // [u, v] after the conscious shift
  T shift_gate;
  T floated;  // [u, v] at the next consumption time
  T decision;
  T decision_gate;
};

template <class T>
GravityFieldT<T> gravity_field(const Weights<T>& w, const GravityOptions& options) {
  return {w.embeddings, w.log_mass, options};
}

template <class T>
CellStep<T> cell_step(const Weights<T>& w, const GravityFieldT<T>& field, const T& c_prev,
                      const T& h_prev, std::size_t item, const FloatPlan& plan,
                      bool ablate_conscious_only) {
  const std::size_t d = field.dim();
  CellStep<T> s;
  s.conscious = gru_step(w.conscious, c_prev, row(w.embeddings, item));
  auto shifted = shift_state(w.shift, s.conscious, h_prev);
  s.shifted = std::move(shifted.state);
  s.shift_gate = std::move(shifted.gate);
  s.floated = float_with_plan(field, s.shifted, plan);
  auto decided = decision_state(w.decision, s.conscious, slice(s.floated, 0, d),
                                ablate_conscious_only);
  s.decision = std::move(decided.state);
  s.decision_gate = std::move(decided.gate);
  return s;
}

}  // namespace fanc
