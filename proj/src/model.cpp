#include "fanc/model.hpp"

#include <cmath>
#include <string>

#include "fanc/errors.hpp"

namespace fanc {

Shape parameter_shape(std::string_view name, const ModelDims& dims) {
  const std::size_t n = dims.n_items, du = dims.d_u, dc = dims.d_c;
  if (name == "embeddings") return Shape(n, du);
  if (name == "log_mass") return Shape(n);
  if (name.ends_with("_input") && !name.starts_with("shift") && !name.starts_with("decision"))
    return Shape(dc, du);
  if (name.ends_with("_recurrent") && !name.starts_with("shift") &&
      !name.starts_with("decision"))
    return Shape(dc, dc);
  if (name == "shift_projection" || name == "shift_gate_input") return Shape(2 * du, dc);
  if (name == "shift_gate_recurrent") return Shape(2 * du, 2 * du);
  if (name == "decision_projection" || name == "decision_gate_input") return Shape(du, dc);
  if (name == "decision_gate_recurrent") return Shape(du, du);
  throw ContractViolation("unknown parameter " + std::string(name));
}

ModelParameters ModelParameters::zeros(const ModelDims& dims) {
  FANC_REQUIRE(dims.n_items >= 1 && dims.d_u >= 1 && dims.d_c >= 1, "model dims must be positive");
  ModelParameters p;
  p.dims = dims;
  p.weights.visit([&](std::string_view name, Array& a) { a = Array(parameter_shape(name, dims)); });
  const double log_mass = -std::log(static_cast<double>(dims.n_items));
  for (auto& v : p.weights.log_mass.values()) v = log_mass;
  return p;
}

ModelParameters ModelParameters::initialize(const ModelDims& dims, std::uint64_t seed) {
  ModelParameters p = zeros(dims);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> embedding_noise(0.0, 0.1);
  for (auto& v : p.weights.embeddings.values()) v = embedding_noise(rng);
  p.weights.visit([&](std::string_view name, Array& a) {
    if (name == "embeddings" || name == "log_mass") return;
    const double limit = std::sqrt(6.0 / static_cast<double>(a.rows() + a.cols()));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    for (auto& v : a.values()) v = uniform(rng);
  });
  return p;
}

void ModelParameters::validate() const {
  weights.visit([&](std::string_view name, const Array& a) {
    const Shape expected = parameter_shape(name, dims);
    FANC_REQUIRE(a.shape() == expected, "parameter " + std::string(name) + " has shape " +
                                            a.shape().str() + ", expected " + expected.str());
    FANC_REQUIRE(a.all_finite(), "parameter " + std::string(name) + " is not finite");
  });
}

bool ModelParameters::identical(const ModelParameters& other) const {
  if (!(dims == other.dims)) return false;
  bool same = true;
  std::size_t k = 0;
  std::array<const Array*, 14> mine{};
  weights.visit([&](std::string_view, const Array& a) { mine[k++] = &a; });
  k = 0;
  other.weights.visit([&](std::string_view, const Array& a) { same = same && mine[k++]->identical(a); });
  return same;
}

Weights<Var> bind_parameters(Tape& tape, const Weights<Array>& weights) {
  return weights.map<Var>([&](std::string_view, const Array& a) { return tape.parameter(a); });
}

Weights<Array> collect_gradients(const Gradients& grads, const Weights<Var>& bound) {
  return bound.map<Array>([&](std::string_view, const Var& v) { return grads[v]; });
}

Weights<Array> zeros_like(const Weights<Array>& w) {
  return w.map<Array>([](std::string_view, const Array& a) { return Array::zeros_like(a); });
}

void accumulate(Weights<Array>& into, const Weights<Array>& add) {
  std::array<const Array*, 14> src{};
  std::size_t k = 0;
  add.visit([&](std::string_view, const Array& a) { src[k++] = &a; });
  k = 0;
  into.visit([&](std::string_view, Array& a) { a += *src[k++]; });
}

}  // namespace fanc
