#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rnnsig/error.hpp"
#include "rnnsig/path.hpp"
#include "support.hpp"

using namespace rnnsig;

TEST_SUITE("path") {
  TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(PiecewiseLinearPath({}, {}), ValidationError);
    CHECK_THROWS_AS(PiecewiseLinearPath({0.0, 0.5, 0.5}, {{0.0}, {1.0}, {2.0}}), ValidationError);
    CHECK_THROWS_AS(PiecewiseLinearPath({0.0, 1.5}, {{0.0}, {1.0}}), ValidationError);
    CHECK_THROWS_AS(PiecewiseLinearPath({0.0, 1.0}, {{0.0}, {1.0, 2.0}}), ValidationError);
    CHECK_THROWS_AS(PiecewiseLinearPath({0.0, 1.0}, {{0.0}}), ValidationError);
    CHECK_NOTHROW(PiecewiseLinearPath({0.3}, {{1.0, 2.0}}));
  }

  TEST_CASE("evaluate interpolates and clamps") {
    const PiecewiseLinearPath p({0.0, 0.5, 1.0}, {{0.0, 0.0}, {1.0, 0.0}, {1.0, 2.0}});
    CHECK(p.evaluate(0.25)[0] == doctest::Approx(0.5));
    CHECK(p.evaluate(0.75)[1] == doctest::Approx(1.0));
    CHECK(p.evaluate(1.0)[1] == 2.0);
    CHECK(p.evaluate(0.5)[0] == 1.0);
  }

  TEST_CASE("total variation examples") {
    // Unit square walk: 4 edges.
    const auto sq = from_samples(std::vector<Vector>{{1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {0.0, 0.0}});
    CHECK(total_variation(sq) == doctest::Approx(4.0));
    CHECK(total_variation(sq, 0.125, 0.375) == doctest::Approx(1.0));
    const PiecewiseLinearPath constant({0.0, 1.0}, {{2.0}, {2.0}});
    CHECK(total_variation(constant) == 0.0);
    CHECK_THROWS_AS(total_variation(sq, 0.6, 0.4), ValidationError);
  }

  TEST_CASE("normalize puts paths into the admissible set") {
    auto rng = testsupport::rng_for(21);
    for (double L : {0.25, 0.5, 0.75}) {
      for (int trial = 0; trial < 30; ++trial) {
        const auto raw = testsupport::random_path(rng, 3, 7, 2.0);
        // Shift so the translation step matters.
        std::vector<Vector> vals(raw.values().begin(), raw.values().end());
        for (auto& v : vals) v[0] += 5.0;
        const PiecewiseLinearPath shifted(std::vector<double>(raw.times().begin(), raw.times().end()), vals);
        const auto n = normalize(shifted, PathConfig{L});
        CHECK(testsupport::vec_norm(n.path.evaluate(0.0)) == 0.0);
        CHECK(total_variation(n.path) <= L * (1 + 1e-12));
        CHECK(n.scale <= 1.0);
      }
    }
    // A short path is left alone apart from translation.
    const PiecewiseLinearPath tiny({0.0, 1.0}, {{1.0}, {1.1}});
    const auto n = normalize(tiny, PathConfig{0.5});
    CHECK(n.scale == 1.0);
    CHECK(n.path.evaluate(1.0)[0] == doctest::Approx(0.1));
    CHECK_THROWS_AS(normalize(tiny, PathConfig{1.0}), ValidationError);
    CHECK_THROWS_AS(normalize(tiny, PathConfig{0.0}), ValidationError);
  }

  TEST_CASE("time augmentation") {
    const auto p = from_samples(std::vector<Vector>{{0.1}, {0.2}});
    const auto a = time_augment(p, PathConfig{0.5});
    CHECK(a.dim() == 2);
    CHECK(a.evaluate(1.0)[1] == doctest::Approx(0.25));
    CHECK(a.evaluate(0.5)[1] == doctest::Approx(0.125));
    CHECK(a.evaluate(0.5)[0] == doctest::Approx(0.1));
    // TV of the augmented path stays below 1 when TV(X) <= L.
    auto rng = testsupport::rng_for(22);
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = testsupport::random_normalized_path(rng, 2, 9, 0.5);
      CHECK(total_variation(time_augment(x, PathConfig{0.5})) <= 0.5 + 0.25 + 1e-12);
    }
  }

  TEST_CASE("stop_at freezes the path after j/T") {
    const auto p = from_samples(std::vector<Vector>{{1.0}, {3.0}, {2.0}, {5.0}});
    const auto s = stop_at(p, 2, 4);
    CHECK(s.evaluate(0.25)[0] == doctest::Approx(1.0));
    CHECK(s.evaluate(0.5)[0] == doctest::Approx(3.0));
    CHECK(s.evaluate(0.9)[0] == doctest::Approx(3.0));
    CHECK(s.evaluate(1.0)[0] == doctest::Approx(3.0));
    CHECK(stop_at(p, 4, 4).evaluate(1.0)[0] == doctest::Approx(5.0));
    CHECK_THROWS_AS(stop_at(p, 5, 4), ValidationError);
    CHECK(stop_at(p, 0, 4).evaluate(0.7)[0] == 0.0);
  }

  TEST_CASE("restrict_to and sample") {
    const auto p = from_samples(std::vector<Vector>{{1.0}, {3.0}});
    const auto r = p.restrict_to(0.25, 0.75);
    CHECK(r.times().front() == 0.25);
    CHECK(r.times().back() == 0.75);
    CHECK(r.num_points() == 3);
    CHECK(r.evaluate(0.25)[0] == doctest::Approx(0.5));
    const auto s = p.sample(4);
    REQUIRE(s.size() == 4);
    CHECK(s[1][0] == doctest::Approx(1.0));
    CHECK(s[3][0] == doctest::Approx(3.0));
  }

  TEST_CASE("samples CSV round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "rnnsig_path_test";
    std::filesystem::create_directories(dir);
    const std::vector<Vector> samples{{0.5, -1.25}, {1e-17, 3.0}, {2.0, 0.1}};
    write_samples_csv(dir / "s.csv", samples);
    CHECK(read_samples_csv(dir / "s.csv") == samples);

    {
      std::ofstream f(dir / "h.csv");
      f << "x1,x2\n1,2\n3,4\n";
    }
    const auto h = read_samples_csv(dir / "h.csv");
    REQUIRE(h.size() == 2);
    CHECK(h[1][1] == 4.0);

    {
      std::ofstream f(dir / "bad.csv");
      f << "1,2\n3\n";
    }
    CHECK_THROWS_AS(read_samples_csv(dir / "bad.csv"), ValidationError);
    CHECK_THROWS_AS(read_samples_csv(dir / "missing.csv"), ValidationError);
    std::filesystem::remove_all(dir);
  }
}
