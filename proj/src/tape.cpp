#include "fanc/tape.hpp"

#include <cmath>
#include <string>

#include "fanc/errors.hpp"
#include "fanc/kernels.hpp"
#include "ops_detail.hpp"

namespace fanc {

const Array& Var::value() const {
  FANC_REQUIRE(tape_ != nullptr, "unbound Var");
  return tape_->value(*this);
}

const Array& Gradients::operator[](const Var& leaf) const {
  const auto it = grads_.find(leaf.id());
  FANC_REQUIRE(it != grads_.end(), "no gradient recorded for node " + std::to_string(leaf.id()) +
                                       " (not a parameter leaf)");
  return it->second;
}

Var Tape::constant(Array value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::parameter(Array value) {
  Node n;
  n.parameter = true;
  n.needs_grad = true;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(Op op, std::initializer_list<Var> inputs, Aux aux) {
  Node n;
  n.op = op;
  n.aux = aux;
  for (const Var& v : inputs) {
    FANC_REQUIRE(v.tape_ == this, "operands recorded on different tapes");
    n.in[n.arity++] = v.id_;
    n.needs_grad = n.needs_grad || nodes_[v.id_].needs_grad;
  }
  n.value = evaluate(n, nullptr);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

const Array& Tape::input_value(const Node& node, int k, const std::vector<Array>* values) const {
  return values ? (*values)[node.in[k]] : nodes_[node.in[k]].value;
}

Array Tape::evaluate(const Node& node, const std::vector<Array>* values) const {
  auto in = [&](int k) -> const Array& { return input_value(node, k, values); };
  switch (node.op) {
    case Op::Leaf: return node.value;
    case Op::Add: return in(0) + in(1);
    case Op::Sub: return in(0) - in(1);
    case Op::Mul: return in(0) * in(1);
    case Op::ScaleShift: {
      const Array& x = in(0);
      Array y(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = node.aux.a * x[i] + node.aux.b;
      return y;
    }
    case Op::Affine: return affine(in(0), in(1));
    case Op::Logistic: return logistic(in(0));
    case Op::Tanh: return hyperbolic_tangent(in(0));
    case Op::Interpolate: return interpolate(in(0), in(1), in(2));
    case Op::Concat: return concat(in(0), in(1));
    case Op::Slice: return slice(in(0), node.aux.i, node.aux.j);
    case Op::Row: return row(in(0), node.aux.i);
    case Op::Gravity:
      return gravity_acceleration(in(0), in(1), in(2),
                                  GravityOptions{node.aux.a, node.aux.b, node.aux.flag});
    case Op::DistanceNll: return distance_nll(in(0), in(1), node.aux.i);
  }
  throw ContractViolation("unknown op");
}

void Tape::backprop(const Node& node, const Array& g, std::vector<Array>& adjoint) const {
  auto wants = [&](int k) { return nodes_[node.in[k]].needs_grad; };
  auto adj = [&](int k) -> Array& {
    Array& a = adjoint[node.in[k]];
    if (a.size() != nodes_[node.in[k]].value.size() || !(a.shape() == nodes_[node.in[k]].value.shape()))
      a = Array::zeros_like(nodes_[node.in[k]].value);
    return a;
  };
  auto in = [&](int k) -> const Array& { return nodes_[node.in[k]].value; };
  const auto& K = kernels::active();

  switch (node.op) {
    case Op::Leaf: return;
    case Op::Add:
      if (wants(0)) adj(0) += g;
      if (wants(1)) adj(1) += g;
      return;
    case Op::Sub:
      if (wants(0)) adj(0) += g;
      if (wants(1)) {
        Array& b = adj(1);
        for (std::size_t i = 0; i < g.size(); ++i) b[i] -= g[i];
      }
      return;
    case Op::Mul:
      if (wants(0)) {
        Array& a = adj(0);
        for (std::size_t i = 0; i < g.size(); ++i) a[i] += g[i] * in(1)[i];
      }
      if (wants(1)) {
        Array& b = adj(1);
        for (std::size_t i = 0; i < g.size(); ++i) b[i] += g[i] * in(0)[i];
      }
      return;
    case Op::ScaleShift:
      if (wants(0)) K.axpy(node.aux.a, g.data(), adj(0).data(), g.size());
      return;
    case Op::Affine: {
      const Array& w = in(0);
      const Array& x = in(1);
      if (wants(0)) {
        Array& wb = adj(0);
        for (std::size_t r = 0; r < w.rows(); ++r)
          K.axpy(g[r], x.data(), wb.data() + r * w.cols(), w.cols());
      }
      if (wants(1)) K.matvec_transpose_acc(w.data(), w.rows(), w.cols(), g.data(), adj(1).data());
      return;
    }
    case Op::Logistic:
      if (wants(0)) {
        Array& a = adj(0);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = node.value[i];
          a[i] += g[i] * y * (1.0 - y);
        }
      }
      return;
    case Op::Tanh:
      if (wants(0)) {
        Array& a = adj(0);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = node.value[i];
          a[i] += g[i] * (1.0 - y * y);
        }
      }
      return;
    case Op::Interpolate: {
      const Array& gate = in(0);
      const Array& a = in(1);
      const Array& b = in(2);
      if (wants(0)) {
        Array& t = adj(0);
        for (std::size_t i = 0; i < g.size(); ++i) t[i] += g[i] * (a[i] - b[i]);
      }
      if (wants(1)) {
        Array& t = adj(1);
        for (std::size_t i = 0; i < g.size(); ++i) t[i] += g[i] * gate[i];
      }
      if (wants(2)) {
        Array& t = adj(2);
        for (std::size_t i = 0; i < g.size(); ++i) t[i] += g[i] * (1.0 - gate[i]);
      }
      return;
    }
    case Op::Concat: {
      const std::size_t na = in(0).size();
      if (wants(0)) {
        Array& t = adj(0);
        for (std::size_t i = 0; i < na; ++i) t[i] += g[i];
      }
      if (wants(1)) {
        Array& t = adj(1);
        for (std::size_t i = 0; i < in(1).size(); ++i) t[i] += g[na + i];
      }
      return;
    }
    case Op::Slice:
      if (wants(0)) {
        Array& t = adj(0);
        for (std::size_t i = 0; i < node.aux.j; ++i) t[node.aux.i + i] += g[i];
      }
      return;
    case Op::Row:
      if (wants(0)) {
        Array& t = adj(0);
        const std::size_t cols = in(0).cols();
        for (std::size_t i = 0; i < cols; ++i) t[node.aux.i * cols + i] += g[i];
      }
      return;
    case Op::Gravity: {
      const Array& e = in(0);
      const Array& log_mass = in(1);
      const Array& u = in(2);
      const GravityOptions opts{node.aux.a, node.aux.b, node.aux.flag};
      const Array masses = detail::masses_from_log(log_mass);
      Array upstream = g;
      if (opts.clamp) {
        const Array raw = detail::gravity_raw(e, masses, u, opts.epsilon);
        const double norm = std::sqrt(squared_norm(raw));
        if (norm > opts.a_max) {
          // d/da of a_max * a / |a|
          double proj = 0.0;
          for (std::size_t k = 0; k < raw.size(); ++k) proj += raw[k] * g[k];
          proj /= norm * norm;
          for (std::size_t k = 0; k < raw.size(); ++k)
            upstream[k] = opts.a_max / norm * (g[k] - raw[k] * proj);
        }
      }
      Array e_bar(e.shape());
      Array mass_bar(log_mass.shape());
      Array u_bar(u.shape());
      K.gravity_vjp(e.data(), masses.data(), e.rows(), u.size(), u.data(),
                    {opts.epsilon * opts.epsilon, 0.5 * static_cast<double>(u.size())},
                    upstream.data(), e_bar.data(), mass_bar.data(), u_bar.data());
      if (wants(0)) adj(0) += e_bar;
      if (wants(1)) adj(1) += mass_bar * masses;
      if (wants(2)) adj(2) += u_bar;
      return;
    }
    case Op::DistanceNll: {
      const Array& d = in(0);
      const Array& e = in(1);
      const std::size_t target = node.aux.i;
      const std::size_t dim = d.size();
      const double up = g[0];
      const auto sm = detail::distance_softmax(d, e);
      if (wants(0)) {
        Array& t = adj(0);
        for (std::size_t j = 0; j < e.rows(); ++j) K.axpy(2.0 * up * sm.probs[j], e.data() + j * dim, t.data(), dim);
        K.axpy(-2.0 * up, e.data() + target * dim, t.data(), dim);
      }
      if (wants(1)) {
        Array& t = adj(1);
        for (std::size_t j = 0; j < e.rows(); ++j) {
          const double c = 2.0 * up * (sm.probs[j] - (j == target ? 1.0 : 0.0));
          double* tr = t.data() + j * dim;
          const double* er = e.data() + j * dim;
          for (std::size_t k = 0; k < dim; ++k) tr[k] += c * (d[k] - er[k]);
        }
      }
      return;
    }
  }
}

Gradients Tape::reverse_gradients(const Var& output) const {
  FANC_REQUIRE(output.tape_ == this, "output recorded on a different tape");
  const Array& out = nodes_[output.id_].value;
  FANC_REQUIRE(out.size() == 1,
               "reverse_gradients: output must be scalar, got shape " + out.shape().str());
  std::vector<Array> adjoint(nodes_.size(), Array(Shape(0)));
  adjoint[output.id_] = Array(out.shape(), 1.0);
  for (std::size_t k = output.id_ + 1; k-- > 0;) {
    const Node& n = nodes_[k];
    if (!n.needs_grad || n.op == Op::Leaf || adjoint[k].size() != n.value.size()) continue;
    backprop(n, adjoint[k], adjoint);
  }
  Gradients grads;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (!nodes_[k].parameter) continue;
    const bool touched = k <= output.id_ && adjoint[k].shape() == nodes_[k].value.shape() &&
                         adjoint[k].size() == nodes_[k].value.size();
    grads.grads_.emplace(static_cast<std::uint32_t>(k),
                         touched ? std::move(adjoint[k]) : Array::zeros_like(nodes_[k].value));
  }
  return grads;
}

std::vector<Array> Tape::replay() const {
  std::vector<Array> values;
  values.reserve(nodes_.size());
  for (const Node& n : nodes_) values.push_back(evaluate(n, &values));
  return values;
}

namespace {
Tape& tape_of(const Var& v) {
  FANC_REQUIRE(v.tape() != nullptr, "unbound Var");
  return *v.tape();
}
}  // namespace

Var operator+(const Var& a, const Var& b) { return tape_of(a).record(Op::Add, {a, b}); }
Var operator-(const Var& a, const Var& b) { return tape_of(a).record(Op::Sub, {a, b}); }
Var operator*(const Var& a, const Var& b) { return tape_of(a).record(Op::Mul, {a, b}); }
Var operator*(double s, const Var& a) {
  return tape_of(a).record(Op::ScaleShift, {a}, {.a = s, .b = 0.0});
}
Var operator-(double s, const Var& a) {
  return tape_of(a).record(Op::ScaleShift, {a}, {.a = -1.0, .b = s});
}

Var affine(const Var& w, const Var& x) { return tape_of(w).record(Op::Affine, {w, x}); }
Var logistic(const Var& x) { return tape_of(x).record(Op::Logistic, {x}); }
Var hyperbolic_tangent(const Var& x) { return tape_of(x).record(Op::Tanh, {x}); }
Var interpolate(const Var& gate, const Var& a, const Var& b) {
  return tape_of(gate).record(Op::Interpolate, {gate, a, b});
}
Var concat(const Var& a, const Var& b) { return tape_of(a).record(Op::Concat, {a, b}); }
Var slice(const Var& a, std::size_t offset, std::size_t length) {
  return tape_of(a).record(Op::Slice, {a}, {.i = offset, .j = length});
}
Var row(const Var& m, std::size_t index) {
  return tape_of(m).record(Op::Row, {m}, {.i = index});
}
Var gravity_acceleration(const Var& embeddings, const Var& log_mass, const Var& u,
                         const GravityOptions& options) {
  return tape_of(u).record(Op::Gravity, {embeddings, log_mass, u},
                           {.a = options.epsilon, .b = options.a_max, .flag = options.clamp});
}
Var distance_nll(const Var& d, const Var& embeddings, std::size_t target) {
  return tape_of(d).record(Op::DistanceNll, {d, embeddings}, {.i = target});
}

}  // namespace fanc
