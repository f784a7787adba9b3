#pragma once

// Inner-loop arithmetic used by the eager ops and the tape's backward rules.
// Every kernel has a portable scalar reference and, on x86-64, an AVX2/FMA
// variant. The variant is picked once at startup from CPUID and can be
// forced with FANC_KERNELS=scalar|avx2 or select_backend().

#include <cstddef>
#include <string_view>

namespace fanc::kernels {

enum class Backend { Scalar, Avx2 };

struct GravityTerms {
  double eps2;       // softening length squared
  double half_dim;   // exponent d_u / 2 of the softened distance
};

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x, W row-major rows x cols
  void (*matvec)(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
  // x_bar += W^T g
  void (*matvec_transpose_acc)(const double* w, std::size_t rows, std::size_t cols,
                               const double* g, double* x_bar);
  // out[i] = ||e_i - q||^2 over the rows of E (n x d)
  void (*squared_distances)(const double* e, std::size_t n, std::size_t d, const double* q,
                            double* out);
  // a = sum_i m_i (e_i - u) / (||e_i - u||^2 + eps^2)^(d/2)
  void (*gravity)(const double* e, const double* mass, std::size_t n, std::size_t d,
                  const double* u, GravityTerms terms, double* a);
  // Vector-Jacobian product of gravity() for upstream g. Accumulates into
  // e_bar (n x d), mass_bar (n, derivative w.r.t. m_i) and u_bar (d).
  void (*gravity_vjp)(const double* e, const double* mass, std::size_t n, std::size_t d,
                      const double* u, GravityTerms terms, const double* g, double* e_bar,
                      double* mass_bar, double* u_bar);
};

const KernelTable& scalar_kernels();
/// Null when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

const KernelTable& active();
bool available(Backend b);
/// Throws ContractViolation if the backend is unavailable.
void select_backend(Backend b);
std::string_view backend_name(Backend b);

}  // namespace fanc::kernels
