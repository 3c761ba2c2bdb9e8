#include <atomic>
#include <cstdlib>
#include <string_view>

#include "rnnsig/simd/kernels.hpp"

namespace rnnsig::simd {

#if defined(RNNSIG_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(RNNSIG_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif

const KernelTable* avx2_kernels() noexcept {
#if defined(RNNSIG_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2Table;
#endif
  return nullptr;
}

const KernelTable* neon_kernels() noexcept {
#if defined(RNNSIG_HAVE_NEON)
  // Advanced SIMD is mandatory on AArch64.
  return &kNeonTable;
#endif
  return nullptr;
}

namespace {

const KernelTable* detect() noexcept {
  if (const char* env = std::getenv("RNNSIG_SIMD")) {
    if (std::string_view(env) == "scalar") return &scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  if (const KernelTable* t = neon_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

bool select(Backend backend) noexcept {
  const KernelTable* t = nullptr;
  switch (backend) {
    case Backend::Scalar: t = &scalar_kernels(); break;
    case Backend::Avx2: t = avx2_kernels(); break;
    case Backend::Neon: t = neon_kernels(); break;
  }
  if (t == nullptr) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace rnnsig::simd
