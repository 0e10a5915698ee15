#include <atomic>
#include <cstdlib>
#include <string>

#include "entrylab/kernels.hpp"

namespace entrylab::kernels {
namespace {

constexpr KernelTable kScalar{Backend::scalar, scalar::dot, scalar::gemv, scalar::gemv_t,
                              scalar::ger, scalar::axpy};
constexpr KernelTable kAvx2{Backend::avx2, avx2::dot, avx2::gemv, avx2::gemv_t, avx2::ger,
                            avx2::axpy};

const KernelTable* initial_table() {
  // ENTRYLAB_KERNELS=scalar pins the reference path without recompiling.
  if (const char* env = std::getenv("ENTRYLAB_KERNELS"); env && std::string(env) == "scalar") {
    return &kScalar;
  }
  return avx2_available() ? &kAvx2 : &kScalar;
}

std::atomic<const KernelTable*>& table() {
  static std::atomic<const KernelTable*> t{initial_table()};
  return t;
}

}  // namespace

bool avx2_available() {
#if defined(ENTRYLAB_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

const KernelTable& active() { return *table().load(std::memory_order_acquire); }

bool select(Backend backend) {
  if (backend == Backend::avx2 && !avx2_available()) {
    table().store(&kScalar, std::memory_order_release);
    return false;
  }
  table().store(backend == Backend::avx2 ? &kAvx2 : &kScalar, std::memory_order_release);
  return true;
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace entrylab::kernels
