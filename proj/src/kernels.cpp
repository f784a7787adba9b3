#include "fanc/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "fanc/errors.hpp"

namespace fanc::kernels {

#if FANC_HAVE_AVX2
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if FANC_HAVE_AVX2
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  if (supported) return &avx2_kernel_table();
#endif
  return nullptr;
}

namespace {

const KernelTable* initial_table() {
  if (const char* env = std::getenv("FANC_KERNELS")) {
    const std::string choice(env);
    if (choice == "scalar") return &scalar_kernels();
    if (choice == "avx2" && avx2_kernels()) return avx2_kernels();
  }
  if (const auto* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool available(Backend b) { return b == Backend::Scalar || avx2_kernels() != nullptr; }

void select_backend(Backend b) {
  FANC_REQUIRE(available(b), "kernel backend " + std::string(backend_name(b)) + " unavailable");
  current().store(b == Backend::Scalar ? &scalar_kernels() : avx2_kernels(),
                  std::memory_order_release);
}

std::string_view backend_name(Backend b) { return b == Backend::Scalar ? "scalar" : "avx2"; }

}  // namespace fanc::kernels
