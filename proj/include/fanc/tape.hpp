#pragma once

// Reverse-mode differentiation over a recorded sequence of array-level
// primitives. A Tape owns the record; Var is a cheap handle into it.

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fanc/array.hpp"
#include "fanc/ops.hpp"

namespace fanc {

class Tape;

class Var {
 public:
  Var() = default;
  const Array& value() const;
  const Shape& shape() const { return value().shape(); }
  std::uint32_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Parameter leaf -> gradient. Leaves the output does not depend on map to zeros.
class Gradients {
 public:
  const Array& operator[](const Var& leaf) const;
  std::size_t size() const noexcept { return grads_.size(); }

 private:
  friend class Tape;
  std::unordered_map<std::uint32_t, Array> grads_;
};

enum class Op : std::uint8_t {
  Leaf,
  Add,
  Sub,
  Mul,
  ScaleShift,
  Affine,
  Logistic,
  Tanh,
  Interpolate,
  Concat,
  Slice,
  Row,
  Gravity,
  DistanceNll,
};

/// Scalar and index attributes of a recorded operation.
struct TapeAux {
  double a = 0.0;
  double b = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  bool flag = false;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Array value);
  /// A leaf whose gradient reverse_gradients() reports.
  Var parameter(Array value);

  const Array& value(const Var& v) const { return nodes_[v.id_].value; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Exact gradients of a size-1 output w.r.t. every parameter leaf.
  Gradients reverse_gradients(const Var& output) const;

  /// Re-evaluates every recorded operation from the leaves and returns the
  /// node values in record order.
  std::vector<Array> replay() const;

  // Recording entry points used by the Var overloads.
  using Aux = TapeAux;
  Var record(Op op, std::initializer_list<Var> inputs, Aux aux = {});

 private:
  struct Node {
    Op op = Op::Leaf;
    std::uint8_t arity = 0;
    bool parameter = false;
    bool needs_grad = false;
    std::array<std::uint32_t, 3> in{};
    Aux aux;
    Array value;
  };

  Array evaluate(const Node& node, const std::vector<Array>* values) const;
  void backprop(const Node& node, const Array& upstream, std::vector<Array>& adjoint) const;
  const Array& input_value(const Node& node, int k, const std::vector<Array>* values) const;

  std::vector<Node> nodes_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator*(double s, const Var& a);
Var operator-(double s, const Var& a);

Var affine(const Var& w, const Var& x);
Var logistic(const Var& x);
Var hyperbolic_tangent(const Var& x);
Var interpolate(const Var& gate, const Var& a, const Var& b);
Var concat(const Var& a, const Var& b);
Var slice(const Var& a, std::size_t offset, std::size_t length);
Var row(const Var& m, std::size_t index);
Var gravity_acceleration(const Var& embeddings, const Var& log_mass, const Var& u,
                         const GravityOptions& options);
Var distance_nll(const Var& d, const Var& embeddings, std::size_t target);

inline bool all_finite(const Var& v) { return v.value().all_finite(); }
inline const Array& value_of(const Var& v) { return v.value(); }

}  // namespace fanc

namespace fanc {
inline Var ones_like(const Var& v) { return v.tape()->constant(Array(v.shape(), 1.0)); }
}  // namespace fanc
