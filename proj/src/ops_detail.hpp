#pragma once

// Forward/backward helpers shared by the eager ops and the tape.

#include <cstddef>

#include "fanc/array.hpp"
#include "fanc/ops.hpp"

namespace fanc::detail {

Array masses_from_log(const Array& log_mass);

/// Unclamped softened acceleration.
Array gravity_raw(const Array& embeddings, const Array& masses, const Array& u, double epsilon);

/// Rescales `a` in place to norm a_max when clamping is on and exceeded.
/// Returns true when the cap was applied.
bool clamp_acceleration(Array& a, const GravityOptions& options);

struct DistanceSoftmax {
  Array sq_dist;
  Array probs;
  double log_normalizer;  // log sum_j exp(-(s_j - min_dist))
  double min_dist;
};
DistanceSoftmax distance_softmax(const Array& d, const Array& embeddings);

void check_affine(const Array& w, const Array& x);
void check_same(const Array& a, const Array& b, const char* op);

}  // namespace fanc::detail
