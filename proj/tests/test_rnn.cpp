#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rnnsig/checkpoint.hpp"
#include "rnnsig/error.hpp"
#include "rnnsig/gated.hpp"
#include "rnnsig/rnn.hpp"
#include "support.hpp"

using namespace rnnsig;

namespace {

const Activation kIdentity{ActivationKind::Identity};
const Activation kLogistic{ActivationKind::Logistic};
const Activation kTanh{ActivationKind::Tanh};

double factorial(std::size_t k) {
  double f = 1.0;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return f;
}

// Scalar objective sum_j <g_j, z_j> used for gradient checks.
double weighted_outputs(const std::vector<Vector>& z, const std::vector<Vector>& g) {
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j)
    for (std::size_t i = 0; i < z[j].size(); ++i) s += g[j][i] * z[j][i];
  return s;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

std::vector<Vector> random_samples(std::mt19937_64& rng, std::size_t T, std::size_t d) {
  std::vector<Vector> xs;
  for (std::size_t j = 0; j < T; ++j) xs.push_back(testsupport::random_vector(rng, d));
  return xs;
}

// Power iteration on A^T A.
double power_iteration(const Matrix& a) {
  Vector v(a.cols(), 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const Vector av = matvec(a, v);
    Vector atav(a.cols(), 0.0);
    matvec_transposed_add(a, av, atav);
    lambda = norm(atav);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = atav[i] / lambda;
  }
  return std::sqrt(lambda);
}

}  // namespace

TEST_SUITE("rnn") {
  TEST_CASE("logistic derivative closed forms") {
    CHECK(kLogistic.derivative(0.0, 1) == doctest::Approx(0.25));
    CHECK(std::abs(kLogistic.derivative(0.0, 2)) < 1e-15);
    for (double x = -10.0; x <= 10.0; x += 0.37) {
      const double s = logistic(x);
      CHECK(kLogistic.derivative(x, 1) == doctest::Approx(s * (1 - s)).epsilon(1e-13));
      CHECK(kLogistic.derivative(x, 2) == doctest::Approx(s * (1 - s) * (1 - 2 * s)).epsilon(1e-12));
      const double t = std::tanh(x);
      CHECK(kTanh.derivative(x, 1) == doctest::Approx(1 - t * t).epsilon(1e-12));
      CHECK(kTanh.derivative(x, 2) == doctest::Approx(-2 * t * (1 - t * t)).epsilon(1e-10));
      CHECK(kIdentity.derivative(x, 1) == 1.0);
      CHECK(kIdentity.derivative(x, 2) == 0.0);
    }
    CHECK(logistic(-800.0) >= 0.0);
    CHECK(logistic(800.0) == 1.0);
  }

  TEST_CASE("higher derivatives agree with finite differences of the previous order") {
    const double h = 1e-5;
    for (const auto& act : {kLogistic, kTanh}) {
      for (std::size_t n = 1; n <= 8; ++n)
        for (double x : {-2.3, -0.4, 0.0, 0.9, 3.1}) {
          const double fd = (act.derivative(x + h, n - 1) - act.derivative(x - h, n - 1)) / (2 * h);
          CHECK(act.derivative(x, n) == doctest::Approx(fd).epsilon(1e-6 * factorial(n) * std::pow(4.0, n)));
        }
    }
  }

  TEST_CASE("derivative sup bounds on a grid") {
    for (std::size_t n = 1; n <= 8; ++n) {
      double ml = 0.0, mt = 0.0;
      for (double x = -12.0; x <= 12.0; x += 1e-3) {
        ml = std::max(ml, std::abs(kLogistic.derivative(x, n)));
        mt = std::max(mt, std::abs(kTanh.derivative(x, n)));
      }
      CHECK(ml <= std::pow(2.0, n - 1.0) * factorial(n));
      CHECK(mt <= std::pow(4.0, n) * factorial(n));
    }
    CHECK_THROWS_AS(kTanh.derivative(0.0, 17), ValidationError);
  }

  TEST_CASE("activation parsing") {
    CHECK(Activation::parse("tanh") == kTanh);
    CHECK(Activation::parse("logistic") == kLogistic);
    CHECK(Activation::parse("sigmoid") == kLogistic);
    CHECK(Activation::parse("identity") == kIdentity);
    CHECK_THROWS_AS(Activation::parse("relu"), ValidationError);
    CHECK(kLogistic.lipschitz() == 0.25);
    CHECK(kTanh.growth_constant() == 4.0);
  }

  TEST_CASE("forward: constant-drive closed form") {
    auto p = zero_params(2, 3, 1, kIdentity);
    p.b = {0.5, -1.0};
    std::vector<Vector> xs(8, Vector{1.0, 2.0, 3.0});
    const auto fwd = forward(p, xs);
    for (std::size_t j = 0; j <= 8; ++j) {
      CHECK(fwd.h[j][0] == doctest::Approx(j / 8.0 * 0.5));
      CHECK(fwd.h[j][1] == doctest::Approx(-(j / 8.0)));
    }
  }

  TEST_CASE("forward: T = 1 and an unrolled oracle") {
    auto rng = testsupport::rng_for(41);
    const auto p = testsupport::random_params(rng, 2, 2, 1, kTanh);
    const auto x1 = testsupport::random_vector(rng, 2);
    const auto fwd1 = forward(p, std::vector<Vector>{x1});
    const auto f = cell(p, p.h0, x1);
    CHECK(fwd1.h[1][0] == doctest::Approx(p.h0[0] + f[0]));

    const auto xs = random_samples(rng, 4, 2);
    const auto fwd = forward(p, xs);
    double h[2] = {p.h0[0], p.h0[1]};
    for (std::size_t j = 0; j < 4; ++j) {
      double pre[2];
      for (int i = 0; i < 2; ++i)
        pre[i] = p.U(i, 0) * h[0] + p.U(i, 1) * h[1] + p.V(i, 0) * xs[j][0] + p.V(i, 1) * xs[j][1] + p.b[i];
      for (int i = 0; i < 2; ++i) h[i] += 0.25 * std::tanh(pre[i]);
      CHECK(fwd.h[j + 1][0] == doctest::Approx(h[0]).epsilon(1e-14));
      CHECK(fwd.h[j + 1][1] == doctest::Approx(h[1]).epsilon(1e-14));
      CHECK(fwd.z[j][0] == doctest::Approx(p.psi(0, 0) * h[0] + p.psi(0, 1) * h[1]).epsilon(1e-14));
    }
  }

  TEST_CASE("forward rejects shape mismatches") {
    auto p = zero_params(2, 3, 1, kIdentity);
    CHECK_THROWS_AS(forward(p, std::vector<Vector>{{1.0, 2.0}}), ValidationError);
    p.b = {1.0};
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }

  TEST_CASE("linear residual updates with f and -f cancel") {
    auto rng = testsupport::rng_for(42);
    auto p = testsupport::random_params(rng, 3, 2, 1, kIdentity);
    p.U = Matrix(3, 3);
    auto q = p;
    for (double& v : q.V.data()) v = -v;
    for (double& v : q.b) v = -v;
    const auto xs = random_samples(rng, 6, 2);
    const auto a = forward(p, xs), b = forward(q, xs);
    for (std::size_t j = 0; j <= 6; ++j)
      for (std::size_t i = 0; i < 3; ++i)
        CHECK((a.h[j][i] - p.h0[i]) + (b.h[j][i] - p.h0[i]) == doctest::Approx(0.0).epsilon(1e-14));
  }

  TEST_CASE("backward matches central finite differences") {
    for (const auto& act : {kIdentity, kLogistic, kTanh}) {
      auto rng = testsupport::rng_for(43 + static_cast<int>(act.kind()));
      for (int trial = 0; trial < 3; ++trial) {
        const auto p = testsupport::random_params(rng, 3, 2, 2, act);
        const auto xs = random_samples(rng, 5, 2);
        const auto g = random_samples(rng, 5, 2);
        const auto fwd = forward(p, xs);
        const auto grads = backward(p, xs, fwd, g);
        const Vector flat = grads.flatten();
        Vector theta = p.flatten();
        const double h = 1e-5;
        for (std::size_t k = 0; k < theta.size(); ++k) {
          auto pp = p, pm = p;
          Vector tp = theta, tm = theta;
          tp[k] += h;
          tm[k] -= h;
          pp.unflatten(tp);
          pm.unflatten(tm);
          const double fd =
              (weighted_outputs(forward(pp, xs).z, g) - weighted_outputs(forward(pm, xs).z, g)) / (2 * h);
          CHECK(rel_err(flat[k], fd) < 1e-4);
        }
        for (std::size_t j = 0; j < xs.size(); ++j)
          for (std::size_t i = 0; i < 2; ++i) {
            auto xp = xs, xm = xs;
            xp[j][i] += h;
            xm[j][i] -= h;
            const double fd = (weighted_outputs(forward(p, xp).z, g) - weighted_outputs(forward(p, xm).z, g)) / (2 * h);
            CHECK(rel_err(grads.x[j][i], fd) < 1e-4);
          }
      }
    }
  }

  TEST_CASE("backward: zero upstream and the T = 1 identity closed form") {
    auto rng = testsupport::rng_for(44);
    const auto p = testsupport::random_params(rng, 2, 2, 1, kIdentity);
    const std::vector<Vector> xs{{0.3, -0.7}};
    const auto fwd = forward(p, xs);
    const auto zero = backward(p, xs, fwd, std::vector<Vector>{{0.0}});
    for (double v : zero.flatten()) CHECK(v == 0.0);

    // z = psi (h0 + U h0 + V x + b); dz/dpsi = h1, dz/db = psi^T,
    // dz/dU = psi^T h0^T, dz/dh0 = (I + U)^T psi^T.
    const auto g = backward(p, xs, fwd, std::vector<Vector>{{1.0}});
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(g.psi(0, i) == doctest::Approx(fwd.h[1][i]));
      CHECK(g.b[i] == doctest::Approx(p.psi(0, i)));
      for (std::size_t k = 0; k < 2; ++k) {
        CHECK(g.U(i, k) == doctest::Approx(p.psi(0, i) * p.h0[k]));
        CHECK(g.V(i, k) == doctest::Approx(p.psi(0, i) * xs[0][k]));
      }
      const double dh0 = p.psi(0, i) + p.psi(0, 0) * p.U(0, i) + p.psi(0, 1) * p.U(1, i);
      CHECK(g.h0[i] == doctest::Approx(dh0));
    }
  }

  TEST_CASE("Lipschitz constants") {
    auto p = zero_params(2, 2, 1, kLogistic);
    p.U = Matrix(2, 2, {2.0, 0.0, 0.0, 2.0});
    p.V = Matrix(2, 2, {0.0, 1.0, 0.0, 0.0});
    auto k = lipschitz_constants(p);
    CHECK(k.K_h == doctest::Approx(0.5));
    CHECK(k.K_x == doctest::Approx(0.25));
    CHECK(k.K_f == doctest::Approx(0.5));
    p.U = Matrix(2, 2);
    CHECK(lipschitz_constants(p).K_h == 0.0);

    auto rng = testsupport::rng_for(45);
    for (int trial = 0; trial < 10; ++trial) {
      const auto u = testsupport::random_matrix(rng, 3, 3);
      CHECK(operator_norm(u) == doctest::Approx(power_iteration(u)).epsilon(1e-8));
    }
  }

  TEST_CASE("flatten round trip and layout") {
    auto rng = testsupport::rng_for(46);
    const auto p = init_params(4, 2, 1, kTanh, rng);
    CHECK(p.num_parameters() == 16 + 8 + 4 + 4 + 4);
    auto q = zero_params(4, 2, 1, kTanh);
    q.unflatten(p.flatten());
    CHECK(q == p);
    CHECK(p.flatten()[0] == p.U(0, 0));
    CHECK(p.flatten()[16] == p.V(0, 0));
    for (double v : p.h0) CHECK(v == 0.0);
    for (double v : p.U.data()) CHECK(std::abs(v) <= 0.5);
    CHECK_THROWS_AS(q.unflatten(Vector(3)), ValidationError);
  }
}

TEST_SUITE("gated") {
  TEST_CASE("GRU with zero weights follows the fixed-gate recursion") {
    const auto p = GruParams::zeros(2, 1, 1);
    std::vector<Vector> xs(4, Vector{1.0});
    const auto out = gru_forward(p, xs);
    // n = tanh(0) = 0, z = 1/2, so h_{j+1} = h_j - h_j / (2T) from h_0 = 0.
    for (const auto& s : out.states) CHECK(s[0] == 0.0);

    auto q = p;
    q.h0 = {1.0, -2.0};
    const auto o2 = gru_forward(q, xs);
    for (std::size_t j = 0; j <= 4; ++j) {
      const double want = std::pow(1.0 - 1.0 / 8.0, static_cast<double>(j));
      CHECK(o2.states[j][0] == doctest::Approx(want));
      CHECK(o2.states[j][1] == doctest::Approx(-2.0 * want));
    }
  }

  TEST_CASE("LSTM with zero weights has a linear cell recursion") {
    auto p = LstmParams::zeros(1, 1, 1);
    p.c0 = {2.0};
    std::vector<Vector> xs(5, Vector{0.3});
    const auto out = lstm_forward(p, xs);
    // i = f = o = 1/2, g = 0: c' = c/2, h' = tanh(c')/2 (new values), then
    // residual: state += (new - old) / T.
    double h = 0.0, c = 2.0;
    for (std::size_t j = 0; j < 5; ++j) {
      const double cn = 0.5 * c, hn = 0.5 * std::tanh(cn);
      h += (hn - h) / 5.0;
      c += (cn - c) / 5.0;
      CHECK(out.states[j + 1][0] == doctest::Approx(h).epsilon(1e-14));
      CHECK(out.states[j + 1][1] == doctest::Approx(c).epsilon(1e-14));
    }
  }

  TEST_CASE("one gated step changes the state by O(1/T)") {
    auto rng = testsupport::rng_for(47);
    const auto g = GruParams::random(3, 2, 1, rng);
    const auto l = LstmParams::random(3, 2, 1, rng);
    for (std::size_t T : {10u, 100u, 1000u}) {
      std::vector<Vector> xs(T, testsupport::random_vector(rng, 2));
      const auto a = gru_forward(g, xs), b = lstm_forward(l, xs);
      CHECK(testsupport::max_abs_diff(a.states[1], a.states[0]) * T <= 4.0);
      CHECK(testsupport::max_abs_diff(b.states[1], b.states[0]) * T <= 4.0);
    }
  }

  TEST_CASE("gated backward matches finite differences") {
    auto rng = testsupport::rng_for(48);
    const auto xs = random_samples(rng, 4, 2);
    const auto gz = random_samples(rng, 4, 1);
    const double h = 1e-5;
    {
      const auto p = GruParams::random(3, 2, 1, rng);
      const auto grads = gru_backward(p, xs, gz);
      const Vector flat = grads.params.flatten();
      const Vector theta = p.flatten();
      for (std::size_t k = 0; k < theta.size(); ++k) {
        auto pp = p, pm = p;
        Vector tp = theta, tm = theta;
        tp[k] += h;
        tm[k] -= h;
        pp.unflatten(tp);
        pm.unflatten(tm);
        const double fd = (weighted_outputs(gru_forward(pp, xs).z, gz) - weighted_outputs(gru_forward(pm, xs).z, gz)) / (2 * h);
        CHECK(rel_err(flat[k], fd) < 1e-4);
      }
    }
    {
      const auto p = LstmParams::random(3, 2, 1, rng);
      const auto grads = lstm_backward(p, xs, gz);
      const Vector flat = grads.params.flatten();
      const Vector theta = p.flatten();
      for (std::size_t k = 0; k < theta.size(); ++k) {
        auto pp = p, pm = p;
        Vector tp = theta, tm = theta;
        tp[k] += h;
        tm[k] -= h;
        pp.unflatten(tp);
        pm.unflatten(tm);
        const double fd =
            (weighted_outputs(lstm_forward(pp, xs).z, gz) - weighted_outputs(lstm_forward(pm, xs).z, gz)) / (2 * h);
        CHECK(rel_err(flat[k], fd) < 1e-4);
      }
      for (std::size_t j = 0; j < xs.size(); ++j)
        for (std::size_t i = 0; i < 2; ++i) {
          auto xp = xs, xm = xs;
          xp[j][i] += h;
          xm[j][i] -= h;
          const double fd =
              (weighted_outputs(lstm_forward(p, xp).z, gz) - weighted_outputs(lstm_forward(p, xm).z, gz)) / (2 * h);
          CHECK(rel_err(grads.x[j][i], fd) < 1e-4);
        }
    }
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("save and load round trip exactly") {
    auto rng = testsupport::rng_for(49);
    for (const auto& act : {kIdentity, kLogistic, kTanh}) {
      const auto p = testsupport::random_params(rng, 3, 2, 2, act, 1e-3);
      std::stringstream ss;
      write_params(ss, p);
      CHECK(read_params(ss) == p);
    }
  }

  TEST_CASE("malformed checkpoints are rejected") {
    std::stringstream bad("rnnsig-params v2\n");
    CHECK_THROWS_AS(read_params(bad), ValidationError);
    auto p = zero_params(2, 1, 1, kTanh);
    std::stringstream ss;
    write_params(ss, p);
    std::string text = ss.str();
    text = text.substr(0, text.size() / 2);
    std::stringstream truncated(text);
    CHECK_THROWS_AS(read_params(truncated), ValidationError);
  }
}
