#include "fanc/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fanc/errors.hpp"
#include "fanc/kernels.hpp"
#include "ops_detail.hpp"

namespace fanc {
namespace detail {

void check_affine(const Array& w, const Array& x) {
  FANC_REQUIRE(w.shape().rank() == 2 && x.shape().rank() == 1 && w.cols() == x.size(),
               "affine: cannot apply " + w.shape().str() + " to " + x.shape().str());
}

void check_same(const Array& a, const Array& b, const char* op) {
  FANC_REQUIRE(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + a.shape().str() +
                                           " vs " + b.shape().str());
}

Array masses_from_log(const Array& log_mass) {
  Array m(log_mass.shape());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(log_mass[i]);
  return m;
}

Array gravity_raw(const Array& embeddings, const Array& masses, const Array& u, double epsilon) {
  FANC_REQUIRE(embeddings.shape().rank() == 2 && u.shape().rank() == 1 &&
                   embeddings.cols() == u.size() && masses.size() == embeddings.rows(),
               "gravity: embeddings " + embeddings.shape().str() + ", masses " +
                   masses.shape().str() + ", position " + u.shape().str());
  const std::size_t d = u.size();
  Array a{Shape(d)};
  kernels::active().gravity(embeddings.data(), masses.data(), embeddings.rows(), d, u.data(),
                            {epsilon * epsilon, 0.5 * static_cast<double>(d)}, a.data());
  return a;
}

bool clamp_acceleration(Array& a, const GravityOptions& options) {
  if (!options.clamp) return false;
  const double norm = std::sqrt(squared_norm(a));
  if (!(norm > options.a_max)) return false;
  const double f = options.a_max / norm;
  for (auto& v : a.values()) v *= f;
  return true;
}

DistanceSoftmax distance_softmax(const Array& d, const Array& embeddings) {
  FANC_REQUIRE(embeddings.shape().rank() == 2 && d.shape().rank() == 1 &&
                   embeddings.cols() == d.size() && embeddings.rows() >= 1,
               "score: embeddings " + embeddings.shape().str() + " vs state " + d.shape().str());
  const std::size_t n = embeddings.rows();
  DistanceSoftmax out{Array(Shape(n)), Array(Shape(n)), 0.0, 0.0};
  kernels::active().squared_distances(embeddings.data(), n, d.size(), d.data(),
                                      out.sq_dist.data());
  double smin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) smin = std::min(smin, out.sq_dist[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.probs[i] = std::exp(-(out.sq_dist[i] - smin));
    z += out.probs[i];
  }
  for (std::size_t i = 0; i < n; ++i) out.probs[i] /= z;
  out.min_dist = smin;
  out.log_normalizer = std::log(z);
  return out;
}

}  // namespace detail

Array affine(const Array& w, const Array& x) {
  detail::check_affine(w, x);
  Array y(Shape(w.rows()));
  kernels::active().matvec(w.data(), w.rows(), w.cols(), x.data(), y.data());
  return y;
}

Array logistic(const Array& x) {
  Array y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
  return y;
}

Array hyperbolic_tangent(const Array& x) {
  Array y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

Array interpolate(const Array& gate, const Array& a, const Array& b) {
  detail::check_same(gate, a, "interpolate");
  detail::check_same(a, b, "interpolate");
  Array y(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = gate[i] * a[i] + (1.0 - gate[i]) * b[i];
  return y;
}

Array concat(const Array& a, const Array& b) {
  FANC_REQUIRE(a.shape().rank() == 1 && b.shape().rank() == 1, "concat: vectors only");
  Array y(Shape(a.size() + b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) y[a.size() + i] = b[i];
  return y;
}

Array slice(const Array& a, std::size_t offset, std::size_t length) {
  FANC_REQUIRE(a.shape().rank() == 1 && offset + length <= a.size(),
               "slice: [" + std::to_string(offset) + ", +" + std::to_string(length) +
                   ") out of " + a.shape().str());
  Array y{Shape(length)};
  for (std::size_t i = 0; i < length; ++i) y[i] = a[offset + i];
  return y;
}

Array row(const Array& m, std::size_t index) {
  FANC_REQUIRE(m.shape().rank() == 2 && index < m.rows(),
               "row: index " + std::to_string(index) + " out of " + m.shape().str());
  Array y(Shape(m.cols()));
  const auto r = m.row(index);
  for (std::size_t i = 0; i < r.size(); ++i) y[i] = r[i];
  return y;
}

Array gravity_acceleration(const Array& embeddings, const Array& log_mass, const Array& u,
                           const GravityOptions& options) {
  Array a = detail::gravity_raw(embeddings, detail::masses_from_log(log_mass), u, options.epsilon);
  detail::clamp_acceleration(a, options);
  return a;
}

Array distance_nll(const Array& d, const Array& embeddings, std::size_t target) {
  FANC_REQUIRE(target < embeddings.rows(), "distance_nll: target out of range");
  const auto sm = detail::distance_softmax(d, embeddings);
  return Array::scalar(sm.sq_dist[target] - sm.min_dist + sm.log_normalizer);
}

}  // namespace fanc
