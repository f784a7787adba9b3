#pragma once

// Unconscious path: items are fixed attracting masses in the embedding space
// and the extended state h = [u, v] floats under their softened gravity
// between consumptions. The conscious state can displace h before floating.

#include <cstddef>
#include <vector>

#include "fanc/model.hpp"
#include "fanc/ops.hpp"
#include "fanc/rk4.hpp"

namespace fanc {

template <class T>
struct GravityFieldT {
  T embeddings;  // N x d_u
  T log_mass;    // N
  GravityOptions options;

  std::size_t dim() const { return value_of(embeddings).cols(); }
};
using GravityField = GravityFieldT<Array>;

template <class T>
T acceleration(const GravityFieldT<T>& field, const T& u) {
  return gravity_acceleration(field.embeddings, field.log_mass, u, field.options);
}

/// d/dt [u, v] = [v, a(u)]. The field has no explicit time dependence.
template <class T>
T phase_velocity(const GravityFieldT<T>& field, const T& h) {
  const std::size_t d = field.dim();
  return concat(slice(h, d, d), acceleration(field, slice(h, 0, d)));
}

/// Potential whose negative gradient is the unclamped acceleration. d_u > 2.
double potential(const GravityField& field, const Array& u);

/// 1/2 |v|^2 + potential(u)
double specific_energy(const GravityField& field, const Array& h);

template <class T>
struct ShiftOutput {
  T state;  // shifted [u, v]
  T gate;
};

template <class T>
ShiftOutput<T> shift_state(const ShiftWeights<T>& w, const T& conscious, const T& h_prev) {
  T gate = logistic(affine(w.gate_input, conscious) + affine(w.gate_recurrent, h_prev));
  T state = interpolate(gate, affine(w.projection, conscious), h_prev);
  return {std::move(state), std::move(gate)};
}

/// RK4 integration schedule: `total` steps of size `step`, keeping the state
/// after `select` steps.
struct FloatPlan {
  double step = 0.0;
  std::size_t select = 0;
  std::size_t total = 0;
};

/// max(2, ceil(steps_per_unit * dt)) steps over dt; identity when dt = 0.
FloatPlan per_interval_plan(double dt, double steps_per_unit);
/// Shared grid of step pad/steps_for_pad, selecting the point nearest dt.
FloatPlan grid_plan(double dt, double pad, std::size_t steps_for_pad);
std::size_t grid_index(double dt, double pad, std::size_t steps_for_pad);

template <class T>
T float_with_plan(const GravityFieldT<T>& field, const T& h, const FloatPlan& plan) {
  if (plan.select == 0) return h;
  auto f = [&](const T& y) { return phase_velocity(field, y); };
  auto trajectory = rk4_steps(f, h, plan.step, plan.select);
  return std::move(trajectory.back());
}

Array float_state(const GravityField& field, const Array& h_shift, double dt,
                  double steps_per_unit);
/// Same, with an explicit step count.
Array float_state_steps(const GravityField& field, const Array& h_shift, double dt,
                        std::size_t n_steps);

/// Time padding: every member floats for the full pad on one shared grid and
/// takes the recorded state nearest its own dt.
std::vector<Array> float_batch_padded(const GravityField& field, const std::vector<Array>& h_batch,
                                      const std::vector<double>& dts, double pad,
                                      std::size_t steps_for_pad);

}  // namespace fanc
