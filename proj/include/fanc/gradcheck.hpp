#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fanc/array.hpp"
#include "fanc/cell.hpp"
#include "fanc/data.hpp"
#include "fanc/model.hpp"

namespace fanc {

struct GroupError {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
};

struct GradientCheckReport {
  std::vector<GroupError> groups;
  bool passed = false;
  double tolerance = 0.0;
  /// Set when f was non-finite at a perturbed point.
  std::optional<std::string> failure;

  double max_relative_error() const;
};

/// Scalar objective of a list of parameter arrays.
using Objective = std::function<double(const std::vector<Array>&)>;

/// Central differences (f(x + h) - f(x - h)) / 2h per coordinate, compared to
/// `analytic` as |a - n| / max(|a|, |n|, 1e-8).
GradientCheckReport finite_difference_check(const Objective& f, const std::vector<Array>& point,
                                            const std::vector<Array>& analytic,
                                            const std::vector<std::string>& names, double step,
                                            double tolerance);

/// A small random model with random sequences for gradient checking.
struct GradcheckInstance {
  ModelParameters model;
  std::vector<BehaviourSequence> sequences;
  ForwardOptions options;
};

struct GradcheckInstanceConfig {
  ModelDims dims{8, 4, 3};
  std::size_t n_sequences = 3;
  std::size_t L = 4;
  double steps_per_unit = 1.0;  // intervals in (1, 1.5] -> 2 RK4 steps each
  double epsilon = 0.5;
  bool clamp = false;
  std::uint64_t seed = 1;
};

GradcheckInstance make_gradcheck_instance(const GradcheckInstanceConfig& config);

/// Checks the total sequence loss of `instance` for every parameter group.
GradientCheckReport check_model_gradients(const GradcheckInstance& instance, double step = 1e-6,
                                          double tolerance = 1e-4);

}  // namespace fanc
