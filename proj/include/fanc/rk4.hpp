#pragma once

// Classical fixed-step fourth-order Runge-Kutta. State is any type with
// State + State and double * State; works for both Array and Var.

#include <cstddef>
#include <vector>

#include "fanc/errors.hpp"

namespace fanc {

/// n_steps uniform steps of size h; returns n_steps + 1 states.
template <class State, class Field>
std::vector<State> rk4_steps(Field&& field, const State& y0, double h, std::size_t n_steps) {
  std::vector<State> trajectory;
  trajectory.reserve(n_steps + 1);
  trajectory.push_back(y0);
  for (std::size_t step = 1; step <= n_steps; ++step) {
    const State& y = trajectory.back();
    const State k1 = field(y);
    const State k2 = field(y + (0.5 * h) * k1);
    const State k3 = field(y + (0.5 * h) * k2);
    const State k4 = field(y + h * k3);
    State next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!all_finite(next)) throw IntegrationError(step);
    trajectory.push_back(std::move(next));
  }
  return trajectory;
}

template <class State, class Field>
std::vector<State> rk4_trajectory(Field&& field, const State& y0, double duration,
                                  std::size_t n_steps) {
  FANC_REQUIRE(n_steps >= 1, "rk4_trajectory: n_steps must be positive");
  FANC_REQUIRE(duration >= 0.0, "rk4_trajectory: negative duration");
  return rk4_steps(field, y0, duration / static_cast<double>(n_steps), n_steps);
}

}  // namespace fanc
