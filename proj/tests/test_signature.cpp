#include <doctest.h>

#include <cmath>

#include "rnnsig/error.hpp"
#include "rnnsig/signature.hpp"
#include "support.hpp"

using namespace rnnsig;

namespace {

double factorial(std::size_t k) {
  double f = 1.0;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return f;
}

bool seq_close(const GradedTensorSeq& a, const GradedTensorSeq& b, double tol) {
  if (a.depth() != b.depth()) return false;
  for (std::size_t k = 0; k <= a.depth(); ++k)
    for (std::size_t i = 0; i < a.level(k).size(); ++i)
      if (std::abs(a.level(k)[i] - b.level(k)[i]) > tol * (1.0 + std::abs(b.level(k)[i]))) return false;
  return true;
}

}  // namespace

TEST_SUITE("signature") {
  TEST_CASE("segment signature is the tensor power of the increment") {
    const double delta[] = {1.0, 2.0};
    const auto s = segment_signature(delta, 3);
    CHECK(s.seq.level(0)[0] == 1.0);
    CHECK(s.seq.level(2) == DenseTensor(2, 2, {1, 2, 2, 4}));
    CHECK(s.seq.level(3).at({1, 1, 0}) == doctest::Approx(4.0));

    const double zero[] = {0.0, 0.0};
    const auto z = segment_signature(zero, 4);
    for (std::size_t k = 1; k <= 4; ++k) CHECK(z.seq.level(k).is_zero());

    const double three[] = {3.0};
    CHECK(segment_signature(three, 3).seq.level(3)[0] == doctest::Approx(27.0));
    CHECK(segment_signature(three, 3, SigConvention::Standard).seq.level(3)[0] == doctest::Approx(4.5));
  }

  TEST_CASE("linear path has level k equal to b^k") {
    const PiecewiseLinearPath p({0.0, 0.3, 1.0}, {{1.0, -1.0}, {1.3, -0.4}, {2.0, 1.0}});
    const auto s = signature(p, 4);
    const double b[] = {1.0, 2.0};
    const auto seg = segment_signature(b, 4);
    CHECK(seq_close(s.seq, seg.seq, 1e-13));
  }

  TEST_CASE("(t, t^2) cross terms") {
    // Finely sampled parabola; the polyline signature converges at O(h^2).
    const std::size_t n = 2000;
    std::vector<double> times;
    std::vector<Vector> vals;
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      times.push_back(t);
      vals.push_back({t, t * t});
    }
    const auto s = signature(PiecewiseLinearPath(times, vals), 2);
    CHECK(s.seq.level(2).at({0, 1}) == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
    CHECK(s.seq.level(2).at({1, 0}) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(s.seq.level(2).at({0, 1}) + s.seq.level(2).at({1, 0}) ==
          doctest::Approx(2.0 * s.seq.level(1)[0] * s.seq.level(1)[1]).epsilon(1e-12));
  }

  TEST_CASE("splitting at 1/2 reproduces the unsplit signature") {
    const PiecewiseLinearPath straight({0.0, 1.0}, {{0.0, 0.0}, {0.7, -0.2}});
    const auto split = chen(signature(straight, 5, 0.0, 0.5), signature(straight, 5, 0.5, 1.0));
    CHECK(seq_close(split.seq, signature(straight, 5).seq, 1e-12));
  }

  TEST_CASE("Chen consistency at random split points") {
    auto rng = testsupport::rng_for(31);
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = testsupport::random_path(rng, 2, 6);
      const double s = testsupport::uniform(rng, 0.0, 0.4);
      const double u = testsupport::uniform(rng, 0.4, 0.6);
      const double t = testsupport::uniform(rng, 0.6, 1.0);
      const auto whole = signature(p, 4, s, t);
      const auto joined = chen(signature(p, 4, s, u), signature(p, 4, u, t));
      CHECK(seq_close(joined.seq, whole.seq, 1e-11));
      const auto std_whole = signature(p, 4, s, t, SigConvention::Standard);
      const auto std_joined =
          tensor_algebra_product(signature(p, 4, s, u, SigConvention::Standard).seq,
                                 signature(p, 4, u, t, SigConvention::Standard).seq);
      CHECK(seq_close(std_joined, std_whole.seq, 1e-11));
    }
  }

  TEST_CASE("conversion is level-wise k!") {
    auto rng = testsupport::rng_for(32);
    const auto p = testsupport::random_path(rng, 3, 5);
    const auto f = signature(p, 4);
    const auto st = signature(p, 4, 0.0, 1.0, SigConvention::Standard);
    for (std::size_t k = 0; k <= 4; ++k)
      for (std::size_t i = 0; i < f.seq.level(k).size(); ++i)
        CHECK(f.seq.level(k)[i] == doctest::Approx(factorial(k) * st.seq.level(k)[i]).epsilon(1e-13));
    CHECK(seq_close(convert(convert(f, SigConvention::Standard), SigConvention::Factorial).seq, f.seq, 1e-15));
  }

  TEST_CASE("shuffle identity at level 2") {
    auto rng = testsupport::rng_for(33);
    for (int trial = 0; trial < 20; ++trial) {
      const auto s = signature(testsupport::random_path(rng, 3, 8), 2);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
          CHECK(s.seq.level(2).at({i, j}) + s.seq.level(2).at({j, i}) ==
                doctest::Approx(2.0 * s.seq.level(1)[i] * s.seq.level(1)[j]).epsilon(1e-12));
    }
  }

  TEST_CASE("level norms are bounded by powers of the total variation") {
    auto rng = testsupport::rng_for(34);
    for (int trial = 0; trial < 30; ++trial) {
      const auto p = testsupport::random_path(rng, 2, 6, 0.5);
      const double tv = total_variation(p);
      const auto s = signature(p, 6);
      for (std::size_t k = 1; k <= 6; ++k) CHECK(s.seq.level(k).norm() <= std::pow(tv, k) * (1 + 1e-12));
    }
  }

  TEST_CASE("stopped path signature equals the signature up to j/T") {
    auto rng = testsupport::rng_for(35);
    const PathConfig cfg{0.5};
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t T = 8;
      const auto x = testsupport::random_normalized_path(rng, 2, T, cfg.L);
      const auto xbar = time_augment(x, cfg);
      for (std::size_t j = 0; j <= T; ++j) {
        const auto a = signature(stop_at(xbar, j, T), 4);
        const auto b = signature(xbar, 4, 0.0, static_cast<double>(j) / T);
        CHECK(seq_close(a.seq, b.seq, 1e-12));
      }
    }
  }

  TEST_CASE("norm of the augmented signature stays below 2/(1-L)") {
    auto rng = testsupport::rng_for(36);
    for (double L : {0.25, 0.5, 0.75}) {
      for (int trial = 0; trial < 20; ++trial) {
        const auto x = testsupport::random_normalized_path(rng, 2, 10, L);
        CHECK(sig_norm(signature(time_augment(x, PathConfig{L}), 8)) <= 2.0 / (1.0 - L));
      }
    }
  }

  TEST_CASE("kernel") {
    const PathConfig cfg{0.5};
    const PiecewiseLinearPath zero({0.0, 1.0}, {{0.0, 0.0}, {0.0, 0.0}});
    const double c = (1.0 - cfg.L) / 2.0;
    for (std::size_t depth = 0; depth <= 5; ++depth) {
      double want = 0.0;
      for (std::size_t k = 0; k <= depth; ++k) want += std::pow(c, 2.0 * k);
      CHECK(sig_kernel(zero, zero, depth, cfg) == doctest::Approx(want).epsilon(1e-14));
    }
    auto rng = testsupport::rng_for(37);
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = testsupport::random_normalized_path(rng, 2, 6, cfg.L);
      const auto y = testsupport::random_normalized_path(rng, 2, 6, cfg.L);
      CHECK(sig_kernel(x, x, 4, cfg) >= 1.0);
      CHECK(sig_kernel(x, y, 4, cfg) == doctest::Approx(sig_kernel(y, x, 4, cfg)).epsilon(1e-14));
    }
    const PiecewiseLinearPath other({0.0, 1.0}, {{0.0}, {0.1}});
    CHECK_THROWS_AS(sig_kernel(zero, other, 2, cfg), ValidationError);
  }

  TEST_CASE("invalid intervals are rejected") {
    const PiecewiseLinearPath p({0.0, 1.0}, {{0.0}, {1.0}});
    CHECK_THROWS_AS(signature(p, 2, 0.7, 0.3), ValidationError);
    CHECK_THROWS_AS(signature(p, 2, -0.1, 0.3), ValidationError);
    CHECK_THROWS_AS(signature(p, 2, 0.0, 1.1), ValidationError);
    CHECK(signature(p, 3, 0.4, 0.4).seq == GradedTensorSeq::unit(1, 3));
  }
}
