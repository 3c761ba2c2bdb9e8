#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "rnnsig/bounds.hpp"
#include "rnnsig/error.hpp"
#include "rnnsig/rkhs.hpp"
#include "support.hpp"

using namespace rnnsig;

namespace {

const Activation kIdentity{ActivationKind::Identity};
const Activation kLogistic{ActivationKind::Logistic};
const Activation kTanh{ActivationKind::Tanh};

}  // namespace

TEST_SUITE("rkhs") {
  TEST_CASE("alpha entries follow the star products") {
    auto rng = testsupport::rng_for(81);
    const double L = 0.5;
    const auto p = testsupport::random_params(rng, 2, 2, 2, kIdentity, 0.5);
    const auto alpha = alpha_series(p, L, 3);
    CHECK(alpha.outputs() == 2);
    CHECK(alpha.control_dim() == 3);
    const CdeField F(p, L);
    Vector h0bar = p.h0;
    h0bar.resize(4, 0.0);
    for (std::size_t l = 0; l < 2; ++l) {
      CHECK(alpha.channels[l].level(0)[0] == doctest::Approx(p.psi(l, 0) * p.h0[0] + p.psi(l, 1) * p.h0[1]));
      for (std::size_t k = 1; k <= 3; ++k) {
        const double fact = k == 1 ? 1.0 : (k == 2 ? 2.0 : 6.0);
        for (std::size_t r = 0; r < alpha.channels[l].level(k).size(); ++r) {
          const auto v = iterated_star_closed_form(F, word_from_index(r, k, 3), h0bar);
          const double want = (p.psi(l, 0) * v[0] + p.psi(l, 1) * v[1]) / fact;
          CHECK(alpha.channels[l].level(k)[r] == doctest::Approx(want).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("zero initial state gives a zero constant term") {
    auto rng = testsupport::rng_for(82);
    auto p = testsupport::random_params(rng, 3, 2, 1, kTanh);
    p.h0 = Vector(3, 0.0);
    CHECK(alpha_series(p, 0.5, 2).channels[0].level(0)[0] == 0.0);
  }

  TEST_CASE("norm scaling and the penalized loss") {
    auto rng = testsupport::rng_for(83);
    auto p = testsupport::random_params(rng, 3, 2, 1, kTanh);
    const double n1 = rkhs_norm(p, 0.5, 3);
    auto q = p;
    for (double& v : q.psi.data()) v *= -2.5;
    CHECK(rkhs_norm(q, 0.5, 3) == doctest::Approx(2.5 * n1).epsilon(1e-13));
    for (double& v : q.psi.data()) v = 0.0;
    CHECK(rkhs_norm(q, 0.5, 3) == 0.0);
    CHECK(penalized_loss(0.7, p, 0.0, 3, 0.5) == 0.7);
    CHECK(penalized_loss(0.7, p, 0.1, 3, 0.5) == doctest::Approx(0.7 + 0.1 * n1 * n1));
    CHECK_THROWS_AS(penalized_loss(0.7, p, -1.0, 3, 0.5), ValidationError);

    double prev = 0.0;
    for (std::size_t N = 0; N <= 4; ++N) {
      const double n = rkhs_norm(p, 0.5, N);
      CHECK(n >= prev);
      prev = n;
    }
  }

  TEST_CASE("prediction: zero alpha and stop index") {
    auto rng = testsupport::rng_for(84);
    auto p = testsupport::random_params(rng, 2, 2, 1, kTanh);
    const auto x = testsupport::random_normalized_path(rng, 2, 8, 0.5);
    const auto alpha = alpha_series(p, 0.5, 3);
    const auto full = rkhs_predict(alpha, x);
    const auto stopped = rkhs_predict(alpha, x, StopIndex{8, 8});
    CHECK(full[0] == doctest::Approx(stopped[0]).epsilon(1e-12));
    const auto x3 = stop_at(x, 3, 8);
    CHECK(rkhs_predict(alpha, x, StopIndex{3, 8})[0] ==
          doctest::Approx(rkhs_predict(alpha, signature(time_augment(x3, PathConfig{0.5}), 3, 0.0, 3.0 / 8))[0])
              .epsilon(1e-12));
    for (double& v : p.psi.data()) v = 0.0;
    CHECK(rkhs_predict(alpha_series(p, 0.5, 3), x)[0] == 0.0);
    CHECK_THROWS_AS(rkhs_predict(alpha, x, StopIndex{9, 8}), ValidationError);
  }

  TEST_CASE("stability gap is controlled by the norm") {
    auto rng = testsupport::rng_for(85);
    const double L = 0.5;
    for (const auto& act : {kIdentity, kLogistic, kTanh}) {
      const auto p = testsupport::random_params(rng, 3, 2, 1, act);
      const auto x = testsupport::random_normalized_path(rng, 2, 8, L);
      const auto same = stability_gap(p, L, 3, x, x);
      CHECK(same.gap == 0.0);
      CHECK(same.bound == 0.0);
      for (int trial = 0; trial < 5; ++trial) {
        const auto y = testsupport::random_normalized_path(rng, 2, 8, L);
        const auto g = stability_gap(p, L, 3, x, y);
        CHECK(g.gap <= g.bound * (1 + 1e-12));
        auto q = p;
        for (double& v : q.psi.data()) v *= 3.0;
        CHECK(stability_gap(q, L, 3, x, y).bound == doctest::Approx(3.0 * g.bound).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("alpha norm bound inside the radius") {
    auto rng = testsupport::rng_for(86);
    const double L = 0.5;
    for (const auto& act : {kLogistic, kTanh, kIdentity}) {
      for (int trial = 0; trial < 5; ++trial) {
        auto p = testsupport::random_params(rng, 2, 2, 1, act);
        const double limit = radius_limit(p, L);
        const double factor = std::isfinite(limit) ? 0.9 * limit / frobenius_norm(p.W()) : 0.3;
        for (double& v : p.U.data()) v *= factor;
        for (double& v : p.V.data()) v *= factor;
        for (std::size_t N = 0; N <= 4; ++N) {
          const auto b = alpha_norm_bound(p, L, N);
          REQUIRE(b.applicable);
          CHECK(rkhs_norm(p, L, N) <= b.value);
        }
      }
    }
  }

  TEST_CASE("identity activation: xi approaches z_T") {
    auto rng = testsupport::rng_for(87);
    const double L = 0.5;
    auto p = testsupport::random_params(rng, 2, 2, 1, kIdentity, 0.3);
    const auto x = testsupport::random_normalized_path(rng, 2, 4, L);
    const auto alpha = alpha_series(p, L, 6);
    const double xi = rkhs_predict(alpha, x)[0];
    double prev = 1e300;
    for (std::size_t T : {16u, 32u, 64u, 128u}) {
      const auto zT = forward(p, x.sample(T)).z.back()[0];
      const double gap = std::abs(zT - xi);
      const double bound = operator_norm(p.psi) * compute_bound_constants(p, L).c1 / T +
                           truncation_tail(p, L, 6).value;
      CHECK(gap <= bound);
      CHECK(gap < prev);
      prev = gap;
    }
  }
}

TEST_SUITE("bounds") {
  TEST_CASE("closed-form B for the logistic example") {
    BinaryBoundInput in;
    in.K_psi = 1.0;
    in.L = 0.5;
    in.d = 2.0;
    in.K_W = 0.5 / 256.0;
    const auto r = bound_binary(in);
    CHECK(r.get("B") == doctest::Approx(1.8856180831641267).epsilon(1e-12));
    in.K_W = 0.5 / 64.0;
    CHECK_THROWS_AS(bound_binary(in), ValidationError);
  }

  TEST_CASE("binary terms by hand substitution") {
    struct Case {
      double K_W, K_psi, L, d, n, delta, T, K_loss, risk;
    };
    for (const Case& c : {Case{0.001, 1.0, 0.5, 2.0, 50.0, 0.05, 100.0, 1.0, 0.1},
                          Case{0.002, 2.0, 0.25, 1.0, 1000.0, 0.01, 10.0, 0.5, 0.0},
                          Case{0.0, 0.5, 0.75, 3.0, 7.0, 1.0, 1.0, 2.0, 0.3}}) {
      BinaryBoundInput in;
      in.K_W = c.K_W;
      in.K_psi = c.K_psi;
      in.L = c.L;
      in.d = c.d;
      in.n = c.n;
      in.delta = c.delta;
      in.T = c.T;
      in.K_loss = c.K_loss;
      in.empirical_risk = c.risk;
      const auto r = bound_binary(in);
      const double B = std::sqrt(2.0) * c.K_psi * (1 - c.L) / (1 - c.L - 32 * c.d * c.K_W);
      const double c2 = c.K_loss * c.K_psi * c.K_W * std::exp(c.K_W) * (c.L + std::exp(c.K_W));
      const double t3 = 8 * B * c.K_loss / ((1 - c.L) * std::sqrt(c.n));
      const double t4 = 2 * B * c.K_loss / (1 - c.L) * std::sqrt(std::log(1 / c.delta) / (2 * c.n));
      CHECK(std::abs(r.get("B") - B) <= 1e-12 * B);
      CHECK(std::abs(r.get("c2") - c2) <= 1e-12 * (c2 + 1e-300));
      CHECK(std::abs(r.get("term_discretization") - c2 / c.T) <= 1e-12 * (c2 / c.T + 1e-300));
      CHECK(std::abs(r.get("term_complexity") - t3) <= 1e-12 * t3);
      CHECK(std::abs(r.get("term_confidence") - t4) <= 1e-12 * (t4 + 1e-300));
      CHECK(std::abs(r.get("total") - (c.risk + c2 / c.T + t3 + t4)) <= 1e-12 * r.get("total"));
    }
  }

  TEST_CASE("binary structure: delta = 1, growth in n and K_W") {
    BinaryBoundInput in;
    in.K_W = 0.001;
    in.d = 2;
    in.delta = 1.0;
    CHECK(bound_binary(in).get("term_confidence") == 0.0);
    in.delta = 0.05;
    in.n = 1e16;
    const auto big = bound_binary(in);
    CHECK(big.get("term_complexity") < 1e-5);
    CHECK(big.get("total") == doctest::Approx(big.get("term_discretization")).epsilon(1e-4));
    double prev = 1e300;
    for (double n : {10.0, 100.0, 1000.0}) {
      in.n = n;
      CHECK(bound_binary(in).get("total") < prev);
      prev = bound_binary(in).get("total");
    }
    prev = 0.0;
    for (double kw : {0.0, 0.001, 0.002, 0.004}) {
      in.K_W = kw;
      CHECK(bound_binary(in).get("total") > prev);
      prev = bound_binary(in).get("total");
    }
    in.B = 3.0;
    CHECK(bound_binary(in).get("B") == 3.0);
  }

  TEST_CASE("sequential terms by hand substitution") {
    struct Case {
      double p, K_y, B, L, n, delta, T, sup, risk;
    };
    for (const Case& c : {Case{1, 0.5, 2.0, 0.5, 100, 0.05, 50, 3.0, 0.2}, Case{3, 1.0, 0.7, 0.25, 40, 0.1, 8, 1.5, 0.0},
                          Case{2, 0.0, 5.0, 0.75, 1e4, 0.5, 1000, 0.0, 1.0}}) {
      SequentialBoundInput in{c.p, c.K_y, c.B, c.L, c.n, c.delta, c.T, c.sup, c.risk};
      const auto r = bound_sequential(in);
      const double inv = 1 / (1 - c.L);
      const double c3 = c.sup + 2 * std::sqrt(c.p) * c.B * inv + 2 * c.K_y;
      const double c4 = c.B * inv + c.K_y;
      const double c5 = 4 * c.p * c.B * inv * c4 + c.K_y * c.K_y;
      const double t3 = 4 * c.p * c4 * c.B * inv / std::sqrt(c.n);
      const double t4 = std::sqrt(2 * c5 * std::log(1 / c.delta) / c.n);
      CHECK(std::abs(r.get("c3") - c3) <= 1e-12 * c3);
      CHECK(std::abs(r.get("c4") - c4) <= 1e-12 * c4);
      CHECK(std::abs(r.get("c5") - c5) <= 1e-12 * c5);
      CHECK(std::abs(r.get("term_discretization") - c3 / c.T) <= 1e-12 * c3 / c.T);
      CHECK(std::abs(r.get("term_complexity") - t3) <= 1e-12 * t3);
      CHECK(std::abs(r.get("term_confidence") - t4) <= 1e-12 * t4);
      CHECK(std::abs(r.get("total") - (c.risk + c3 / c.T + t3 + t4)) <= 1e-12 * r.get("total"));
    }
  }

  TEST_CASE("sequential special cases") {
    SequentialBoundInput in{1, 0.0, 0.0, 0.5, 100, 0.05, 10, 2.0, 0.3};
    auto r = bound_sequential(in);
    CHECK(r.get("c4") == 0.0);
    CHECK(r.get("c5") == 0.0);
    CHECK(r.get("total") == doctest::Approx(0.3 + r.get("c3") / 10));
    in = SequentialBoundInput{2, 0.5, 1.0, 0.5, 100, 0.05, 10, 2.0, 0.3};
    const double a = bound_sequential(in).get("term_complexity");
    const double ca = bound_sequential(in).get("term_confidence");
    in.n = 200;
    CHECK(bound_sequential(in).get("term_complexity") == doctest::Approx(a / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(bound_sequential(in).get("term_confidence") == doctest::Approx(ca / std::sqrt(2.0)).epsilon(1e-14));
    in.p = 0.5;
    CHECK_THROWS_AS(bound_sequential(in), ValidationError);
  }

  TEST_CASE("report serialization") {
    BinaryBoundInput in;
    in.K_W = 0.001;
    in.d = 2;
    const auto r = bound_binary(in);
    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j["kind"] == "binary");
    CHECK(j["B"].get<double>() == r.get("B"));
    CHECK(r.to_key_value().find("total=") != std::string::npos);
    CHECK_THROWS_AS(r.get("nope"), ValidationError);
    for (const auto& [k, v] : r.values) CHECK(v >= 0.0);
  }
}
