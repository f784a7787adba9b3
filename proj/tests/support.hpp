#pragma once

// Hand-rolled generators and independent reference implementations. The
// oracles use plain std::vector loops and share no code with the library.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fanc/array.hpp"
#include "fanc/data.hpp"
#include "fanc/model.hpp"

namespace testing {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  fanc::Array vector(std::size_t n, double sd = 1.0) {
    fanc::Array a = fanc::Array::zeros(n);
    for (double& v : a.values()) v = normal(sd);
    return a;
  }
  fanc::Array matrix(std::size_t r, std::size_t c, double sd = 1.0) {
    fanc::Array a = fanc::Array::zeros(r, c);
    for (double& v : a.values()) v = normal(sd);
    return a;
  }
  /// Sequence of `length` interactions, intervals uniform in [lo, hi].
  fanc::BehaviourSequence sequence(std::size_t n_items, std::size_t length, double lo, double hi) {
    fanc::BehaviourSequence s;
    s.id = std::to_string(counter_++);
    double t = 0.0;
    for (std::size_t j = 0; j < length; ++j) {
      if (j > 0) t += uniform(lo, hi);
      s.steps.push_back({index(n_items), t});
    }
    return s;
  }
  /// Model with every parameter drawn at moderate scale.
  fanc::ModelParameters model(const fanc::ModelDims& dims, double embedding_sd = 1.0) {
    auto m = fanc::ModelParameters::zeros(dims);
    m.weights.visit([&](std::string_view name, fanc::Array& a) {
      const double sd = name == "embeddings" ? embedding_sd : name == "log_mass" ? 0.3 : 0.5;
      for (double& v : a.values()) v += normal(sd);
    });
    return m;
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::size_t counter_ = 0;
};

inline Vec to_vec(const fanc::Array& a) { return Vec(a.values().begin(), a.values().end()); }

inline Mat to_mat(const fanc::Array& a) {
  Mat m(a.rows(), Vec(a.cols()));
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) m[r][c] = a(r, c);
  return m;
}

namespace oracle {

inline Vec matvec(const Mat& w, const Vec& x) {
  Vec y(w.size(), 0.0);
  for (std::size_t r = 0; r < w.size(); ++r)
    for (std::size_t c = 0; c < x.size(); ++c) y[r] += w[r][c] * x[c];
  return y;
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
  return y;
}

inline Vec sigmoid(Vec x) {
  for (double& v : x) v = 1.0 / (1.0 + std::exp(-v));
  return x;
}

inline Vec tanh(Vec x) {
  for (double& v : x) v = std::tanh(v);
  return x;
}

/// Bias-free GRU with update z, reset g and candidate c_hat.
inline Vec gru(const Mat& wz, const Mat& uz, const Mat& wc, const Mat& uc, const Mat& wg,
               const Mat& ug, const Vec& c, const Vec& e) {
  const Vec z = sigmoid(add(matvec(wz, e), matvec(uz, c)));
  const Vec g = sigmoid(add(matvec(wg, e), matvec(ug, c)));
  Vec gc(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) gc[i] = g[i] * c[i];
  const Vec ch = tanh(add(matvec(wc, e), matvec(uc, gc)));
  Vec out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = (1.0 - z[i]) * c[i] + z[i] * ch[i];
  return out;
}

/// sum_i m_i (e_i - u) / (|e_i - u|^2 + eps^2)^(d/2), unclamped.
inline Vec gravity(const Mat& e, const Vec& mass, const Vec& u, double eps) {
  const std::size_t d = u.size();
  Vec a(d, 0.0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    double s = eps * eps;
    for (std::size_t k = 0; k < d; ++k) s += (e[i][k] - u[k]) * (e[i][k] - u[k]);
    const double w = mass[i] / std::pow(s, 0.5 * static_cast<double>(d));
    for (std::size_t k = 0; k < d; ++k) a[k] += w * (e[i][k] - u[k]);
  }
  return a;
}

/// Softmax of negative squared distances, by log-sum-exp.
inline Vec distance_softmax(const Vec& d, const Mat& e) {
  Vec neg(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) s += (d[k] - e[i][k]) * (d[k] - e[i][k]);
    neg[i] = -s;
  }
  double top = neg[0];
  for (double v : neg) top = std::max(top, v);
  double z = 0.0;
  for (double v : neg) z += std::exp(v - top);
  Vec p(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) p[i] = std::exp(neg[i] - top) / z;
  return p;
}

/// Classical RK4 on a generic vector field.
template <class F>
Vec rk4(F&& f, Vec y, double duration, std::size_t n) {
  const double h = duration / static_cast<double>(n);
  auto axpy = [](const Vec& y0, double s, const Vec& k) {
    Vec out(y0.size());
    for (std::size_t i = 0; i < y0.size(); ++i) out[i] = y0[i] + s * k[i];
    return out;
  };
  for (std::size_t step = 0; step < n; ++step) {
    const Vec k1 = f(y);
    const Vec k2 = f(axpy(y, h / 2, k1));
    const Vec k3 = f(axpy(y, h / 2, k2));
    const Vec k4 = f(axpy(y, h, k3));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return y;
}

/// Phase-space field [v, a(u)] of the unclamped softened gravity.
inline auto phase_field(const Mat& e, const Vec& mass, double eps) {
  return [&e, &mass, eps](const Vec& h) {
    const std::size_t d = h.size() / 2;
    const Vec u(h.begin(), h.begin() + static_cast<long>(d));
    const Vec a = gravity(e, mass, u, eps);
    Vec out(2 * d);
    for (std::size_t k = 0; k < d; ++k) {
      out[k] = h[d + k];
      out[d + k] = a[k];
    }
    return out;
  };
}

}  // namespace oracle

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
