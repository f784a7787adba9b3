// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the CPUID check in kernels.cpp.

#include <immintrin.h>

#include <cmath>

#include "fanc/kernels.hpp"

namespace fanc::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(w + r * cols, x, cols);
}

void matvec_transpose_acc(const double* w, std::size_t rows, std::size_t cols, const double* g,
                          double* x_bar) {
  for (std::size_t r = 0; r < rows; ++r) axpy(g[r], w + r * cols, x_bar, cols);
}

inline double squared_distance(const double* a, const double* b, std::size_t d) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= d; k += 4) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    acc = _mm256_fmadd_pd(diff, diff, acc);
  }
  double s = hsum(acc);
  for (; k < d; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

void squared_distances(const double* e, std::size_t n, std::size_t d, const double* q,
                       double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = squared_distance(e + i * d, q, d);
}

// a += coef * (e - u)
inline void add_scaled_displacement(double coef, const double* ei, const double* u, double* a,
                                    std::size_t d) {
  const __m256d vc = _mm256_set1_pd(coef);
  std::size_t k = 0;
  for (; k + 4 <= d; k += 4) {
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(ei + k), _mm256_loadu_pd(u + k));
    _mm256_storeu_pd(a + k, _mm256_fmadd_pd(vc, r, _mm256_loadu_pd(a + k)));
  }
  for (; k < d; ++k) a[k] += coef * (ei[k] - u[k]);
}

void gravity(const double* e, const double* mass, std::size_t n, std::size_t d, const double* u,
             GravityTerms terms, double* a) {
  for (std::size_t k = 0; k < d; ++k) a[k] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ei = e + i * d;
    const double s = terms.eps2 + squared_distance(ei, u, d);
    add_scaled_displacement(mass[i] * std::pow(s, -terms.half_dim), ei, u, a, d);
  }
}

void gravity_vjp(const double* e, const double* mass, std::size_t n, std::size_t d,
                 const double* u, GravityTerms terms, const double* g, double* e_bar,
                 double* mass_bar, double* u_bar) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ei = e + i * d;
    __m256d ss = _mm256_setzero_pd();
    __m256d sg = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= d; k += 4) {
      const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(ei + k), _mm256_loadu_pd(u + k));
      ss = _mm256_fmadd_pd(r, r, ss);
      sg = _mm256_fmadd_pd(r, _mm256_loadu_pd(g + k), sg);
    }
    double s = terms.eps2 + hsum(ss);
    double rg = hsum(sg);
    for (; k < d; ++k) {
      const double r = ei[k] - u[k];
      s += r * r;
      rg += r * g[k];
    }
    const double w = std::pow(s, -terms.half_dim);
    mass_bar[i] += w * rg;
    const __m256d along_g = _mm256_set1_pd(mass[i] * w);
    const __m256d along_r = _mm256_set1_pd(-2.0 * terms.half_dim * mass[i] * w / s * rg);
    double* eb = e_bar + i * d;
    k = 0;
    for (; k + 4 <= d; k += 4) {
      const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(ei + k), _mm256_loadu_pd(u + k));
      const __m256d rb = _mm256_fmadd_pd(along_r, r, _mm256_mul_pd(along_g, _mm256_loadu_pd(g + k)));
      _mm256_storeu_pd(eb + k, _mm256_add_pd(_mm256_loadu_pd(eb + k), rb));
      _mm256_storeu_pd(u_bar + k, _mm256_sub_pd(_mm256_loadu_pd(u_bar + k), rb));
    }
    for (; k < d; ++k) {
      const double rb = (mass[i] * w) * g[k] + (-2.0 * terms.half_dim * mass[i] * w / s * rg) *
                                                   (ei[k] - u[k]);
      eb[k] += rb;
      u_bar[k] -= rb;
    }
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{Backend::Avx2,        dot,    axpy,        matvec,
                                 matvec_transpose_acc, squared_distances, gravity, gravity_vjp};
  return table;
}

}  // namespace fanc::kernels
