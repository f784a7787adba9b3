#include "fanc/array.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "fanc/errors.hpp"

namespace fanc {

std::string Shape::str() const {
  switch (rank_) {
    case 0: return "()";
    case 1: return "(" + std::to_string(dims_[0]) + ")";
    default: return "(" + std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) + ")";
  }
}

Array::Array(Shape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
  FANC_REQUIRE(values_.size() == shape_.size(),
               "array: " + std::to_string(values_.size()) + " values for shape " + shape_.str());
}

Array Array::vector(std::initializer_list<double> v) {
  return Array(Shape(v.size()), std::vector<double>(v));
}

Array Array::vector(std::vector<double> v) {
  const auto n = v.size();
  return Array(Shape(n), std::move(v));
}

Array Array::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> v) {
  return Array(Shape(rows, cols), std::vector<double>(v));
}

Array Array::scalar(double v) { return Array(Shape::scalar(), std::vector<double>{v}); }

Array Array::identity(std::size_t n) {
  Array a{Shape(n, n)};
  for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0;
  return a;
}

double Array::item() const {
  FANC_REQUIRE(values_.size() == 1, "item() on array of shape " + shape_.str());
  return values_[0];
}

bool Array::all_finite() const noexcept {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

bool Array::identical(const Array& other) const noexcept {
  return shape_ == other.shape_ &&
         (values_.empty() ||
          std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(double)) == 0);
}

namespace {

void require_same(const Array& a, const Array& b, const char* op) {
  FANC_REQUIRE(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + a.shape().str() +
                                           " vs " + b.shape().str());
}

}  // namespace

Array operator+(const Array& a, const Array& b) {
  require_same(a, b, "add");
  Array out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Array operator-(const Array& a, const Array& b) {
  require_same(a, b, "sub");
  Array out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Array operator*(const Array& a, const Array& b) {
  require_same(a, b, "mul");
  Array out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Array operator*(double s, const Array& a) {
  Array out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

Array operator-(double s, const Array& a) {
  Array out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s - a[i];
  return out;
}

Array& operator+=(Array& a, const Array& b) {
  require_same(a, b, "add");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

double max_abs_difference(const Array& a, const Array& b) {
  require_same(a, b, "max_abs_difference");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double squared_norm(const Array& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return s;
}

}  // namespace fanc
