// Portable reference kernels. These define the expected results for the
// vectorized variants.

#include <cmath>

#include "fanc/kernels.hpp"

namespace fanc::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(w + r * cols, x, cols);
}

void matvec_transpose_acc(const double* w, std::size_t rows, std::size_t cols, const double* g,
                          double* x_bar) {
  for (std::size_t r = 0; r < rows; ++r) axpy(g[r], w + r * cols, x_bar, cols);
}

void squared_distances(const double* e, std::size_t n, std::size_t d, const double* q,
                       double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ei = e + i * d;
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = ei[k] - q[k];
      s += diff * diff;
    }
    out[i] = s;
  }
}

void gravity(const double* e, const double* mass, std::size_t n, std::size_t d, const double* u,
             GravityTerms terms, double* a) {
  for (std::size_t k = 0; k < d; ++k) a[k] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ei = e + i * d;
    double s = terms.eps2;
    for (std::size_t k = 0; k < d; ++k) {
      const double r = ei[k] - u[k];
      s += r * r;
    }
    const double coef = mass[i] * std::pow(s, -terms.half_dim);
    for (std::size_t k = 0; k < d; ++k) a[k] += coef * (ei[k] - u[k]);
  }
}

void gravity_vjp(const double* e, const double* mass, std::size_t n, std::size_t d,
                 const double* u, GravityTerms terms, const double* g, double* e_bar,
                 double* mass_bar, double* u_bar) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ei = e + i * d;
    double s = terms.eps2;
    double rg = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double r = ei[k] - u[k];
      s += r * r;
      rg += r * g[k];
    }
    const double w = std::pow(s, -terms.half_dim);
    mass_bar[i] += w * rg;
    const double along_g = mass[i] * w;
    const double along_r = -2.0 * terms.half_dim * mass[i] * w / s * rg;
    double* eb = e_bar + i * d;
    for (std::size_t k = 0; k < d; ++k) {
      const double rb = along_g * g[k] + along_r * (ei[k] - u[k]);
      eb[k] += rb;
      u_bar[k] -= rb;
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Backend::Scalar,   dot,    axpy,        matvec,
                                 matvec_transpose_acc, squared_distances, gravity, gravity_vjp};
  return table;
}

}  // namespace fanc::kernels
