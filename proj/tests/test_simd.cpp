#include <doctest.h>

#include <cstring>
#include <vector>

#include "rnnsig/simd/kernels.hpp"
#include "support.hpp"

using namespace rnnsig;

namespace {

std::vector<const simd::KernelTable*> variants() {
  std::vector<const simd::KernelTable*> out;
  if (auto* t = simd::avx2_kernels()) out.push_back(t);
  if (auto* t = simd::neon_kernels()) out.push_back(t);
  return out;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar table is always available and named") {
    CHECK(simd::scalar_kernels().backend == simd::Backend::Scalar);
    CHECK(simd::select(simd::Backend::Scalar));
    CHECK(simd::active().backend == simd::Backend::Scalar);
    // Restore the widest backend for the remaining tests.
    if (simd::avx2_kernels()) simd::select(simd::Backend::Avx2);
    if (simd::neon_kernels()) simd::select(simd::Backend::Neon);
  }

  TEST_CASE("vector variants match the scalar reference on all tail sizes") {
    const auto& ref = simd::scalar_kernels();
    auto rng = testsupport::rng_for(11);
    for (const simd::KernelTable* t : variants()) {
      CAPTURE(t->name);
      for (std::size_t n = 0; n <= 37; ++n) {
        CAPTURE(n);
        const auto x = testsupport::random_vector(rng, n);
        const auto y0 = testsupport::random_vector(rng, n);
        const double alpha = testsupport::uniform(rng);

        auto ya = y0, yb = y0;
        ref.axpy(alpha, x.data(), ya.data(), n);
        t->axpy(alpha, x.data(), yb.data(), n);
        CHECK(bit_equal(ya, yb));

        auto sa = y0, sb = y0;
        ref.scal(alpha, sa.data(), n);
        t->scal(alpha, sb.data(), n);
        CHECK(bit_equal(sa, sb));

        double mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y0[i]);
        const double da = ref.dot(x.data(), y0.data(), n);
        const double db = t->dot(x.data(), y0.data(), n);
        CHECK(std::abs(da - db) <= 1e-15 * (mag + 1.0));
      }
    }
  }

  TEST_CASE("selecting an unavailable backend keeps the current one") {
    const auto before = simd::active().backend;
    if (!simd::neon_kernels()) {
      CHECK_FALSE(simd::select(simd::Backend::Neon));
      CHECK(simd::active().backend == before);
    }
    if (!simd::avx2_kernels()) {
      CHECK_FALSE(simd::select(simd::Backend::Avx2));
      CHECK(simd::active().backend == before);
    }
  }
}
