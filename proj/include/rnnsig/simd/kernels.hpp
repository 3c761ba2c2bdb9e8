#pragma once

// Data-parallel inner loops used by the tensor, signature and RNN code.
//
// Every kernel has a scalar reference implementation. Vector variants (AVX2 on
// x86-64, NEON on AArch64) are compiled in separate translation units and are
// selected once at runtime. Element-wise kernels (axpy, scal) are required to
// be bit-identical to the scalar reference: they use separate multiply and add
// instructions, never fused ones. Reductions (dot) may differ in the last bits
// because the summation order changes.

#include <cstddef>
#include <span>
#include <string_view>

namespace rnnsig::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  std::string_view name;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x[i] *= alpha
  void (*scal)(double alpha, double* x, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

// The table used by the library. Chosen on first use: the widest supported
// variant, unless the environment variable RNNSIG_SIMD is set to "scalar".
const KernelTable& active() noexcept;

// Force a backend (tests and benchmarks). Returns false and leaves the current
// selection in place when the backend is unavailable.
bool select(Backend backend) noexcept;

// Convenience wrappers over active().
inline double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void scal(double alpha, std::span<double> x) noexcept {
  active().scal(alpha, x.data(), x.size());
}

}  // namespace rnnsig::simd
