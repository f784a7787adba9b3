#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fanc {

/// Dimensions of an Array: rank 0 (scalar), 1 (vector) or 2 (row-major matrix).
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::size_t n) : dims_{n, 1}, rank_(1) {}
  Shape(std::size_t rows, std::size_t cols) : dims_{rows, cols}, rank_(2) {}
  static Shape scalar() { return Shape{}; }

  std::size_t rank() const noexcept { return rank_; }
  std::span<const std::size_t> dims() const noexcept { return {dims_.data(), rank_}; }
  std::size_t rows() const noexcept { return rank_ == 0 ? 1 : dims_[0]; }
  std::size_t cols() const noexcept { return rank_ == 2 ? dims_[1] : 1; }
  std::size_t size() const noexcept { return rank_ == 0 ? 1 : dims_[0] * dims_[1]; }

  bool operator==(const Shape& o) const noexcept {
    return rank_ == o.rank_ && rows() == o.rows() && cols() == o.cols();
  }
  std::string str() const;

 private:
  std::array<std::size_t, 2> dims_{1, 1};
  std::size_t rank_ = 0;
};

/// Dense array of 64-bit reals with an immutable shape.
class Array {
 public:
  Array() : shape_(Shape::scalar()), values_(1, 0.0) {}
  explicit Array(Shape shape, double fill = 0.0) : shape_(shape), values_(shape.size(), fill) {}
  Array(Shape shape, std::vector<double> values);

  static Array vector(std::initializer_list<double> v);
  static Array vector(std::vector<double> v);
  static Array matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> v);
  static Array scalar(double v);
  static Array zeros(std::size_t n) { return Array(Shape(n)); }
  static Array zeros(std::size_t rows, std::size_t cols) { return Array(Shape(rows, cols)); }
  static Array zeros_like(const Array& a) { return Array(a.shape()); }
  static Array identity(std::size_t n);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t rows() const noexcept { return shape_.rows(); }
  std::size_t cols() const noexcept { return shape_.cols(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * shape_.cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * shape_.cols() + c]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * shape_.cols(), shape_.cols());
  }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  double item() const;

  bool all_finite() const noexcept;
  /// Bitwise equality of shape and every value.
  bool identical(const Array& other) const noexcept;

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Elementwise arithmetic; shapes must match exactly (no broadcasting).
Array operator+(const Array& a, const Array& b);
Array operator-(const Array& a, const Array& b);
Array operator*(const Array& a, const Array& b);
Array operator*(double s, const Array& a);
Array operator-(double s, const Array& a);
Array& operator+=(Array& a, const Array& b);

double max_abs_difference(const Array& a, const Array& b);
double squared_norm(const Array& a);

}  // namespace fanc
