#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

#include "fanc/array.hpp"
#include "fanc/tape.hpp"

namespace fanc {

struct ModelDims {
  std::size_t n_items = 0;
  std::size_t d_u = 16;  // item embedding / unconscious dimension
  std::size_t d_c = 8;   // conscious dimension
  bool operator==(const ModelDims&) const = default;
};

/// GRU matrices; *_input act on the item embedding, *_recurrent on c.
template <class T>
struct ConsciousWeights {
  T update_input, update_recurrent;
  T candidate_input, candidate_recurrent;
  T reset_input, reset_recurrent;
};

/// Conscious -> extended unconscious coupling.
template <class T>
struct ShiftWeights {
  T projection;      // 2d_u x d_c
  T gate_input;      // 2d_u x d_c
  T gate_recurrent;  // 2d_u x 2d_u
};

template <class T>
struct DecisionWeights {
  T projection;      // d_u x d_c
  T gate_input;      // d_u x d_c
  T gate_recurrent;  // d_u x d_u
};

inline constexpr std::array<std::string_view, 14> kParameterNames{
    "embeddings",          "log_mass",
    "update_input",        "update_recurrent",
    "candidate_input",     "candidate_recurrent",
    "reset_input",         "reset_recurrent",
    "shift_projection",    "shift_gate_input",
    "shift_gate_recurrent", "decision_projection",
    "decision_gate_input", "decision_gate_recurrent"};

template <class T>
struct Weights {
  T embeddings;  // N x d_u, shared by input lookup and scoring
  T log_mass;    // N, item mass = exp(log_mass)
  ConsciousWeights<T> conscious;
  ShiftWeights<T> shift;
  DecisionWeights<T> decision;

  /// Calls f(name, member) for every parameter in kParameterNames order.
  template <class F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <class F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  template <class U, class F>
  Weights<U> map(F&& f) const {
    Weights<U> out;
    std::size_t k = 0;
    std::array<const T*, 14> src{};
    visit([&](std::string_view, const T& t) { src[k++] = &t; });
    k = 0;
    out.visit([&](std::string_view name, U& u) {
      u = f(name, *src[k]);
      ++k;
    });
    return out;
  }

 private:
  template <class Self, class F>
  static void visit_impl(Self& s, F& f) {
    f(kParameterNames[0], s.embeddings);
    f(kParameterNames[1], s.log_mass);
    f(kParameterNames[2], s.conscious.update_input);
    f(kParameterNames[3], s.conscious.update_recurrent);
    f(kParameterNames[4], s.conscious.candidate_input);
    f(kParameterNames[5], s.conscious.candidate_recurrent);
    f(kParameterNames[6], s.conscious.reset_input);
    f(kParameterNames[7], s.conscious.reset_recurrent);
    f(kParameterNames[8], s.shift.projection);
    f(kParameterNames[9], s.shift.gate_input);
    f(kParameterNames[10], s.shift.gate_recurrent);
    f(kParameterNames[11], s.decision.projection);
    f(kParameterNames[12], s.decision.gate_input);
    f(kParameterNames[13], s.decision.gate_recurrent);
  }
};

/// Expected shape of each named parameter for the given dims.
Shape parameter_shape(std::string_view name, const ModelDims& dims);

struct ModelParameters {
  ModelDims dims;
  Weights<Array> weights;

  /// All arrays zero except log_mass = -ln N (total mass 1).
  static ModelParameters zeros(const ModelDims& dims);
  /// Embeddings ~ N(0, 0.1^2), log_mass = -ln N, matrices uniform in
  /// +-sqrt(6 / (fan_in + fan_out)).
  static ModelParameters initialize(const ModelDims& dims, std::uint64_t seed);

  /// Throws ContractViolation on a shape mismatch or non-finite entry.
  void validate() const;
  bool identical(const ModelParameters& other) const;
};

/// Registers every parameter as a leaf on the tape.
Weights<Var> bind_parameters(Tape& tape, const Weights<Array>& weights);
/// Gradient for each bound leaf, in the same layout.
Weights<Array> collect_gradients(const Gradients& grads, const Weights<Var>& bound);

Weights<Array> zeros_like(const Weights<Array>& w);
void accumulate(Weights<Array>& into, const Weights<Array>& add);

}  // namespace fanc
