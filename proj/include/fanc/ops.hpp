#pragma once

// Eager primitives on Array. tape.hpp declares the same names on Var so the
// model equations can be written once as templates over either type.

#include <cstddef>

#include "fanc/array.hpp"

namespace fanc {

struct GravityOptions {
  double epsilon = 0.5;   // softening length
  double a_max = 100.0;   // acceleration norm cap, applied when clamp is set
  bool clamp = true;
};

/// W x. No bias.
Array affine(const Array& w, const Array& x);
Array logistic(const Array& x);
Array hyperbolic_tangent(const Array& x);
/// gate * a + (1 - gate) * b, elementwise.
Array interpolate(const Array& gate, const Array& a, const Array& b);
Array concat(const Array& a, const Array& b);
Array slice(const Array& a, std::size_t offset, std::size_t length);
Array row(const Array& m, std::size_t index);

/// Softened gravitational acceleration at u from items at the rows of
/// `embeddings` with masses exp(log_mass), G = 1.
Array gravity_acceleration(const Array& embeddings, const Array& log_mass, const Array& u,
                           const GravityOptions& options);

/// -log softmax(-||d - e_j||^2)[target] as a scalar Array.
Array distance_nll(const Array& d, const Array& embeddings, std::size_t target);

inline bool all_finite(const Array& a) { return a.all_finite(); }
inline const Array& value_of(const Array& a) { return a; }

}  // namespace fanc

namespace fanc {
inline Array ones_like(const Array& a) { return Array(a.shape(), 1.0); }
}  // namespace fanc
