#include <doctest.h>

#include <cmath>

#include "fanc/errors.hpp"
#include "fanc/gradcheck.hpp"
#include "fanc/tape.hpp"
#include "support.hpp"

using namespace fanc;

namespace {

/// Checks the tape gradient of a scalar function of several leaves against
/// central differences of the same function evaluated eagerly.
template <class F>
void check_gradient(F&& f, const std::vector<Array>& point, double tol = 1e-5) {
  Tape tape;
  std::vector<Var> leaves;
  for (const auto& p : point) leaves.push_back(tape.parameter(p));
  const Var out = f(leaves);
  const Gradients grads = tape.reverse_gradients(out);
  std::vector<Array> analytic;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    analytic.push_back(grads[leaves[i]]);
    names.push_back("arg" + std::to_string(i));
  }
  auto objective = [&](const std::vector<Array>& x) {
    Tape t;
    std::vector<Var> l;
    for (const auto& a : x) l.push_back(t.constant(a));
    return f(l).value().item();
  };
  const auto report = finite_difference_check(objective, point, analytic, names, 1e-6, tol);
  for (const auto& group : report.groups)
    CHECK_MESSAGE(group.max_relative_error < tol, group.name << "[" << group.worst_index
                                                              << "] relative error " << group.max_relative_error);
}

Var sum_of(const Var& v) {
  // Sum via a ones row vector so the output is a scalar-sized array.
  Tape* t = v.tape();
  return affine(t->constant(Array(Shape(1, v.value().size()), 1.0)), v);
}

}  // namespace

TEST_CASE("gradient of x^2 at 3 is 6") {
  Tape tape;
  const Var x = tape.parameter(Array::vector({3.0}));
  const Var y = x * x;
  CHECK(tape.reverse_gradients(y)[x][0] == 6.0);
}

TEST_CASE("gradient of a constant output is zero for every leaf") {
  Tape tape;
  const Var x = tape.parameter(Array::vector({1.0, 2.0}));
  const Var c = tape.constant(Array::vector({5.0}));
  const Var y = 2.0 * c;
  const auto g = tape.reverse_gradients(y);
  CHECK(g[x].identical(Array::vector({0.0, 0.0})));
}

TEST_CASE("non-scalar output is a contract violation") {
  Tape tape;
  const Var x = tape.parameter(Array::vector({1.0, 2.0}));
  CHECK_THROWS_AS(tape.reverse_gradients(logistic(x)), ContractViolation);
}

TEST_CASE("requesting the gradient of a constant leaf is a contract violation") {
  Tape tape;
  const Var x = tape.parameter(Array::vector({1.0}));
  const Var c = tape.constant(Array::vector({2.0}));
  const auto g = tape.reverse_gradients(x * c);
  CHECK_THROWS_AS(g[c], ContractViolation);
}

TEST_CASE("per-op gradients match central differences") {
  testing::Gen g(3);
  const Array w = g.matrix(3, 4), x = g.vector(4), y = g.vector(3), z = g.vector(3);
  check_gradient([](const std::vector<Var>& v) { return sum_of(affine(v[0], v[1])); }, {w, x});
  check_gradient([](const std::vector<Var>& v) { return sum_of(logistic(v[0]) * v[1]); }, {y, z});
  check_gradient([](const std::vector<Var>& v) { return sum_of(hyperbolic_tangent(v[0]) * v[1]); }, {y, z});
  check_gradient([](const std::vector<Var>& v) { return sum_of(interpolate(logistic(v[0]), v[1], v[2]) * v[1]); },
                 {y, z, g.vector(3)});
  check_gradient([](const std::vector<Var>& v) { return sum_of(slice(concat(v[0], v[1]), 2, 3) * slice(concat(v[1], v[0]), 1, 3)); },
                 {y, z});
  check_gradient([](const std::vector<Var>& v) { return sum_of((v[0] - v[1]) * (1.0 - v[0])); }, {y, z});
  check_gradient([](const std::vector<Var>& v) { return sum_of(row(v[0], 2) * row(v[0], 0)); }, {w});
  const Array e = g.matrix(5, 3, 1.5), rho = g.vector(5, 0.3), u = g.vector(3);
  // Moderate spread keeps every softmax weight well above central-difference noise.
  check_gradient([&](const std::vector<Var>& v) { return distance_nll(v[0], v[1], 2); }, {u, 0.5 * e});
  for (bool clamp : {false, true}) {
    GravityOptions opts{0.5, clamp ? 0.2 : 100.0, clamp};
    check_gradient([&](const std::vector<Var>& v) {
      return sum_of(gravity_acceleration(v[0], v[1], v[2], opts) * v[3]);
    }, {e, rho, u, z});
  }
}

TEST_CASE("replay reproduces every recorded value bit for bit") {
  testing::Gen g(9);
  Tape tape;
  const Var e = tape.parameter(g.matrix(6, 3)), rho = tape.parameter(g.vector(6, 0.3));
  const Var u = tape.parameter(g.vector(3)), w = tape.parameter(g.matrix(3, 3));
  Var h = u;
  for (int i = 0; i < 4; ++i)
    h = hyperbolic_tangent(affine(w, h)) + 0.1 * gravity_acceleration(e, rho, h, GravityOptions{});
  const Var loss = distance_nll(h, e, 1);
  const auto first = tape.replay();
  const auto second = tape.replay();
  REQUIRE(first.size() == tape.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].identical(second[i]));
  }
  CHECK(first.back().identical(loss.value()));
}

TEST_CASE("tape and eager evaluation agree bit for bit") {
  testing::Gen g(21);
  const Array w = g.matrix(4, 4), x = g.vector(4), e = g.matrix(7, 4);
  Tape tape;
  const Var vw = tape.constant(w), vx = tape.constant(x), ve = tape.constant(e);
  const Var taped = distance_nll(interpolate(logistic(affine(vw, vx)), hyperbolic_tangent(vx), vx), ve, 3);
  const Array eager = distance_nll(interpolate(logistic(affine(w, x)), hyperbolic_tangent(x), x), e, 3);
  CHECK(taped.value().identical(eager));
}
