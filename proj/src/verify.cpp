#include "rnnsig/verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <random>
#include <sstream>

#include "rnnsig/checkpoint.hpp"
#include "rnnsig/error.hpp"
#include "rnnsig/ode.hpp"
#include "rnnsig/path.hpp"
#include "rnnsig/rkhs.hpp"
#include "rnnsig/bounds.hpp"
#include "rnnsig/signature.hpp"
#include "rnnsig/simd/kernels.hpp"
#include "rnnsig/taylor.hpp"
#include "rnnsig/training.hpp"

namespace rnnsig {

namespace {

using Rng = std::mt19937_64;

double uni(Rng& rng, double scale = 1.0) { return std::uniform_real_distribution<double>(-scale, scale)(rng); }

Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = uni(rng, scale);
  return v;
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Matrix m(r, c);
  for (double& x : m.data()) x = uni(rng, scale);
  return m;
}

RnnParams random_params(Rng& rng, std::size_t e, std::size_t d, Activation act, double scale) {
  return RnnParams{random_matrix(rng, e, e, scale), random_matrix(rng, e, d, scale), random_vector(rng, e, scale),
                   random_matrix(rng, 1, e, 1.0),   random_vector(rng, e, scale),    act};
}

PiecewiseLinearPath random_path(Rng& rng, std::size_t d, std::size_t T) {
  std::vector<Vector> samples;
  Vector x(d, 0.0);
  for (std::size_t j = 0; j < T; ++j) {
    for (double& v : x) v += uni(rng);
    samples.push_back(x);
  }
  return from_samples(samples);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double seq_diff(const GradedTensorSeq& a, const GradedTensorSeq& b) {
  double m = 0.0;
  for (std::size_t k = 0; k <= a.depth(); ++k) m = std::max(m, max_abs_diff(a.level(k).data(), b.level(k).data()));
  return m;
}

double rel_error(const Vector& a, const Vector& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

std::string fmt(const char* label, double v) {
  std::ostringstream s;
  s << label << '=' << v;
  return s.str();
}

class Runner {
 public:
  explicit Runner(VerifyReport& report) : report_(report) {}

  // The check returns its worst observed statistic and whether it passed.
  void run(const std::string& module, const std::string& name,
           const std::function<std::pair<bool, std::string>()>& check) {
    try {
      auto [ok, detail] = check();
      report_.checks.push_back({module, name, ok, std::move(detail)});
    } catch (const std::exception& e) {
      report_.checks.push_back({module, name, false, std::string("threw: ") + e.what()});
    }
  }

 private:
  VerifyReport& report_;
};

}  // namespace

void VerifyConfig::validate() const {
  require(trials >= 1, "verify: trials must be positive");
  for (double t : {sig_tol, ode_tol, grad_tol})
    require(std::isfinite(t) && t > 0.0, "verify: tolerances must be positive");
}

bool VerifyReport::all_passed() const noexcept { return failures() == 0; }

std::size_t VerifyReport::failures() const noexcept {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
}

std::string VerifyReport::to_text() const {
  std::ostringstream out;
  for (const CheckResult& c : checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.module << '/' << c.name << "  " << c.detail << '\n';
  out << (checks.size() - failures()) << '/' << checks.size() << " checks passed\n";
  return out.str();
}

VerifyReport run_verification(const VerifyConfig& cfg) {
  cfg.validate();
  VerifyReport report;
  Runner r(report);
  Rng rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 1);
  const double L = 0.5;
  const Activation logistic(ActivationKind::Logistic), tanh_act(ActivationKind::Tanh), ident(ActivationKind::Identity);

  r.run("simd", "active dot and axpy agree with scalar", [&] {
    const auto& ref = simd::scalar_kernels();
    const auto& act = simd::active();
    double worst = 0.0;
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u}) {
      Vector x = random_vector(rng, n), y = random_vector(rng, n);
      Vector y1 = y, y2 = y;
      ref.axpy(0.37, x.data(), y1.data(), n);
      act.axpy(0.37, x.data(), y2.data(), n);
      if (y1 != y2) return std::pair{false, std::string("axpy differs at n=") + std::to_string(n)};
      worst = std::max(worst, std::abs(ref.dot(x.data(), y.data(), n) - act.dot(x.data(), y.data(), n)));
    }
    return std::pair{worst <= 1e-13, std::string(act.name) + " " + fmt("dot_diff", worst)};
  });

  r.run("tensor_algebra", "product is associative", [&] {
    double worst = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      auto rand_seq = [&] {
        GradedTensorSeq s(2, 3);
        for (std::size_t k = 0; k <= 3; ++k)
          for (double& v : s.level(k).data()) v = uni(rng);
        return s;
      };
      const auto a = rand_seq(), b = rand_seq(), c = rand_seq();
      worst = std::max(worst, seq_diff(tensor_algebra_product(tensor_algebra_product(a, b), c),
                                       tensor_algebra_product(a, tensor_algebra_product(b, c))));
    }
    return std::pair{worst <= cfg.sig_tol, fmt("max_diff", worst)};
  });

  r.run("path", "normalized total variation is at most L", [&] {
    double worst = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto x = normalize(random_path(rng, 2, 12), PathConfig{L}).path;
      worst = std::max(worst, total_variation(x));
      if (max_abs_diff(x.values().front(), Vector(2, 0.0)) != 0.0) return std::pair{false, std::string("X_0 != 0")};
    }
    return std::pair{worst <= L * (1 + 1e-12), fmt("max_tv", worst)};
  });

  r.run("signature", "Chen identity at random split points", [&] {
    double worst = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto x = random_path(rng, 2, 8);
      const double u = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
      worst = std::max(worst, seq_diff(chen(signature(x, 4, 0.0, u), signature(x, 4, u, 1.0)).seq, signature(x, 4).seq));
    }
    return std::pair{worst <= cfg.sig_tol * 1e2, fmt("max_diff", worst)};
  });

  r.run("signature", "level norms bounded by TV^k", [&] {
    double worst = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto x = random_path(rng, 3, 6);
      const double tv = total_variation(x);
      const auto s = signature(x, 5);
      for (std::size_t k = 1; k <= 5; ++k) worst = std::max(worst, s.seq.level(k).norm() / std::pow(tv, double(k)));
    }
    return std::pair{worst <= 1 + 1e-12, fmt("max_ratio", worst)};
  });

  r.run("signature", "augmented signature norm below 2/(1-L)", [&] {
    double worst = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto x = normalize(random_path(rng, 2, 10), PathConfig{L}).path;
      worst = std::max(worst, sig_norm(signature(time_augment(x, PathConfig{L}), 8)));
    }
    return std::pair{worst <= 2 / (1 - L), fmt("max_norm", worst)};
  });

  r.run("rnn", "backward matches finite differences", [&] {
    double worst = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto p = random_params(rng, 3, 2, tanh_act, 0.5);
      std::vector<Vector> xs;
      for (int j = 0; j < 6; ++j) xs.push_back(random_vector(rng, 2));
      const auto fwd = forward(p, xs);
      // Objective: sum of outputs.
      std::vector<Vector> gz(fwd.z.size(), Vector(1, 1.0));
      const Vector g = backward(p, xs, fwd, gz).flatten();
      const Vector theta = p.flatten();
      Vector fd(theta.size());
      auto objective = [&](const Vector& th) {
        RnnParams q = p;
        q.unflatten(th);
        double s = 0.0;
        for (const Vector& z : forward(q, xs).z) s += z[0];
        return s;
      };
      for (std::size_t k = 0; k < theta.size(); ++k) {
        Vector tp = theta, tm = theta;
        tp[k] += 1e-6;
        tm[k] -= 1e-6;
        fd[k] = (objective(tp) - objective(tm)) / 2e-6;
      }
      worst = std::max(worst, rel_error(g, fd));
    }
    return std::pair{worst <= cfg.grad_tol, fmt("max_rel_err", worst)};
  });

  r.run("checkpoint", "parameters round trip exactly", [&] {
    const auto p = random_params(rng, 3, 2, logistic, 1.0);
    std::stringstream s;
    write_params(s, p);
    return std::pair{read_params(s) == p, std::string("text round trip")};
  });

  r.run("ode", "CDE and ODE forms agree", [&] {
    double worst = 0.0;
    const OdeTolerance tol{cfg.ode_tol * 1e-3, cfg.ode_tol * 1e-3};
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto p = random_params(rng, 2, 2, logistic, 1.0);
      const auto x = normalize(random_path(rng, 2, 6), PathConfig{L}).path;
      const Vector ode = integrate_ode(p, x, tol).final_value();
      const Vector cde = integrate_cde(p, time_augment(x, PathConfig{L}), L, tol).final_value();
      worst = std::max(worst, max_abs_diff(std::span(ode), std::span(cde).first(2)));
    }
    return std::pair{worst <= cfg.ode_tol, fmt("max_diff", worst)};
  });

  r.run("ode", "Euler gap within c1/T", [&] {
    double worst = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto p = random_params(rng, 2, 2, logistic, 1.0);
      std::vector<Vector> xs;
      for (int j = 0; j < 32; ++j) xs.push_back(random_vector(rng, 2, 0.3));
      const auto samples = normalize(from_samples(xs), PathConfig{L}).path.sample(32);
      const EulerGap g = euler_gap(p, samples, L, OdeTolerance{1e-12, 1e-11});
      worst = std::max(worst, g.gap / g.bound);
    }
    return std::pair{worst <= 1.0, fmt("max_gap_over_bound", worst)};
  });

  r.run("taylor", "towers match the identity closed form", [&] {
    double worst = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto p = random_params(rng, 2, 2, ident, 0.5);
      const CdeField field(p, L);
      const Vector hbar = random_vector(rng, 4);
      for (std::size_t len = 1; len <= 4; ++len) {
        const std::size_t count = static_cast<std::size_t>(std::pow(3.0, double(len)));
        for (std::size_t i = 0; i < count; ++i) {
          const Word w = word_from_index(i, len, 3);
          worst = std::max(worst, max_abs_diff(iterated_star(field, w, hbar), iterated_star_closed_form(field, w, hbar)));
        }
      }
    }
    return std::pair{worst <= cfg.sig_tol, fmt("max_diff", worst)};
  });

  r.run("taylor", "error below analytic bound inside the radius", [&] {
    double worst = 0.0;
    std::size_t tested = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      auto p = random_params(rng, 2, 2, logistic, 1.0);
      const double s = 0.5 * radius_limit(p, L) / frobenius_norm(p.W());
      for (double& v : p.U.data()) v *= s;
      for (double& v : p.V.data()) v *= s;
      const auto xbar = time_augment(normalize(random_path(rng, 2, 6), PathConfig{L}).path, PathConfig{L});
      const Vector ref = integrate_cde(p, xbar, L, OdeTolerance{1e-13, 1e-12}).final_value();
      for (std::size_t N = 1; N <= 3; ++N) {
        const LambdaBound b = taylor_error_bound(p, L, N);
        if (!b.applicable) continue;
        const Vector h = taylor_expansion(p, xbar, N, 1.0, L);
        double sq = 0.0;
        for (std::size_t i = 0; i < 2; ++i) sq += (h[i] - ref[i]) * (h[i] - ref[i]);
        worst = std::max(worst, std::sqrt(sq) / b.value);
        ++tested;
      }
    }
    return std::pair{tested > 0 && worst <= 1.0, fmt("max_error_over_bound", worst)};
  });

  r.run("rkhs", "alpha pairing reproduces the Taylor expansion", [&] {
    double worst = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto p = random_params(rng, 2, 2, tanh_act, 0.5);
      const auto x = normalize(random_path(rng, 2, 6), PathConfig{L}).path;
      const auto xbar = time_augment(x, PathConfig{L});
      const Vector h = taylor_expansion(p, xbar, 4, 1.0, L);
      const Vector z = matvec(p.psi, std::span(h).first(2));
      worst = std::max(worst, max_abs_diff(rkhs_predict(alpha_series(p, L, 4), x), z));
    }
    return std::pair{worst <= cfg.sig_tol, fmt("max_diff", worst)};
  });

  r.run("rkhs", "stability gap below norm times signature distance", [&] {
    double worst = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto p = random_params(rng, 2, 2, logistic, 0.5);
      const auto x = normalize(random_path(rng, 2, 6), PathConfig{L}).path;
      const auto y = normalize(random_path(rng, 2, 6), PathConfig{L}).path;
      const StabilityGap g = stability_gap(p, L, 3, x, y);
      worst = std::max(worst, g.gap / std::max(g.bound, 1e-300));
    }
    return std::pair{worst <= 1 + 1e-12, fmt("max_gap_over_bound", worst)};
  });

  r.run("bounds", "closed-form B for the logistic example", [&] {
    BinaryBoundInput in;
    in.K_psi = 1.0;
    in.L = 0.5;
    in.d = 2.0;
    in.K_W = 0.5 / 256.0;
    const double B = bound_binary(in).get("B");
    const double expected = 1.8856180831641267;
    return std::pair{std::abs(B - expected) <= 1e-12 * expected, fmt("B", B)};
  });

  r.run("training", "total gradient matches finite differences", [&] {
    const auto data = normalize_dataset(make_spirals(4, 10, cfg.seed + 1), L);
    auto p = init_params(4, 2, 1, tanh_act, rng);
    p.h0 = random_vector(rng, 4, 0.1);
    TrainConfig tc;
    tc.lambda = 0.1;
    const Vector g = total_gradient(p, data, tc);
    const Vector theta = p.flatten();
    Vector fd(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
      RnnParams pp = p, pm = p;
      Vector tp = theta, tm = theta;
      tp[k] += 1e-5;
      tm[k] -= 1e-5;
      pp.unflatten(tp);
      pm.unflatten(tm);
      fd[k] = (evaluate_objective(pp, data, tc).value() - evaluate_objective(pm, data, tc).value()) / 2e-5;
    }
    const double err = rel_error(g, fd);
    return std::pair{err <= cfg.grad_tol, fmt("rel_err", err)};
  });

  r.run("training", "zero-radius attack leaves accuracy unchanged", [&] {
    const auto data = normalize_dataset(make_spirals(6, 12, cfg.seed + 2), L);
    const auto p = init_params(4, 2, 1, tanh_act, rng);
    const AttackResult a = pgd_attack(p, data, AttackConfig{0.0});
    const AttackResult b = pgd_attack(p, data, AttackConfig{0.1});
    const bool ok = a.adversarial_accuracy == a.clean_accuracy && b.max_perturbation <= 0.1 + 1e-12 &&
                    b.adversarial_accuracy <= b.clean_accuracy;
    return std::pair{ok, fmt("clean_acc", a.clean_accuracy)};
  });

  return report;
}

}  // namespace rnnsig
