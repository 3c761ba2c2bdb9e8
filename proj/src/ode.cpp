#include "rnnsig/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rnnsig/error.hpp"
#include "rnnsig/simd/kernels.hpp"

namespace rnnsig {

namespace {

// Dormand-Prince 5(4) tableau, with the dense-output and error coefficients
// of Hairer's DOPRI5.
constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Step-size controller constants.
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - kBeta * 0.75;
constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.2;   // smallest allowed h_new / h
constexpr double kFacMax = 10.0;  // largest allowed h_new / h

double error_norm(std::span<const double> err, std::span<const double> y0, std::span<const double> y1,
                  const OdeTolerance& tol) {
  double s = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double sk = tol.atol + tol.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sk;
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(err.size()));
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

void OdeTolerance::validate() const {
  require(std::isfinite(atol) && std::isfinite(rtol) && atol >= 0.0 && rtol >= 0.0 && atol + rtol > 0.0,
          "ODE tolerances must be non-negative, finite and not both zero");
  require(max_steps > 0, "ODE max_steps must be positive");
}

Vector OdeSolution::final_value() const {
  if (steps_.empty()) return y0_;
  const Step& s = steps_.back();
  Vector y(dim());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = s.rcont[0][i] + s.rcont[1][i];
  return y;
}

Vector OdeSolution::evaluate(double t) const {
  if (steps_.empty() || t <= steps_.front().t0) return y0_;
  // Last step whose start is <= t.
  auto it = std::upper_bound(steps_.begin(), steps_.end(), t, [](double v, const Step& s) { return v < s.t0; });
  const Step& s = *(it - 1);
  const double theta = std::min(1.0, (t - s.t0) / s.h);
  const double theta1 = 1.0 - theta;
  Vector y(dim());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = s.rcont[0][i] +
           theta * (s.rcont[1][i] + theta1 * (s.rcont[2][i] + theta * (s.rcont[3][i] + theta1 * s.rcont[4][i])));
  }
  return y;
}

OdeSolution integrate_piecewise(const SegmentRhs& rhs, Vector y0, std::span<const double> breakpoints,
                                const OdeTolerance& tol) {
  tol.validate();
  require(breakpoints.size() >= 1, "integrate: need at least one breakpoint");
  for (std::size_t k = 1; k < breakpoints.size(); ++k)
    require(breakpoints[k] > breakpoints[k - 1], "integrate: breakpoints must be strictly increasing");
  const std::size_t n = y0.size();
  require(n > 0, "integrate: empty state");

  OdeSolution sol(y0, tol);
  Vector y = std::move(y0);
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  std::size_t attempts = 0;
  double h_carry = 0.0;

  for (std::size_t seg = 0; seg + 1 < breakpoints.size(); ++seg) {
    const double t_begin = breakpoints[seg];
    const double t_end = breakpoints[seg + 1];
    const double span_len = t_end - t_begin;
    double t = t_begin;
    rhs(seg, t, y, k1);

    // Initial step: the smaller of the carried-over size and a local estimate.
    double h;
    {
      const double dnf = max_abs(k1);
      const double dny = max_abs(y);
      const double scale = tol.atol + tol.rtol * dny;
      h = (dnf * span_len <= scale) ? span_len : std::max(1e-6 * span_len, 0.01 * scale / dnf);
      if (h_carry > 0.0) h = std::max(h, std::min(h_carry, span_len));
      h = std::min(h, span_len);
    }

    double facold = 1e-4;
    bool last_rejected = false;
    while (t < t_end) {
      if (++attempts > tol.max_steps) throw NumericalError("integrate: step budget exhausted");
      bool last = false;
      if (t + 1.01 * h >= t_end) {
        h = t_end - t;
        last = true;
      }
      if (h <= 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
        throw NumericalError("integrate: step size underflow at t = " + std::to_string(t));
      }

      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
      rhs(seg, t + c2 * h, ytmp, k2);
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      rhs(seg, t + c3 * h, ytmp, k3);
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      rhs(seg, t + c4 * h, ytmp, k4);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      rhs(seg, t + c5 * h, ytmp, k5);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      rhs(seg, last ? t_end : t + h, ytmp, k6);
      for (std::size_t i = 0; i < n; ++i)
        ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      rhs(seg, last ? t_end : t + h, ynew, k7);
      for (std::size_t i = 0; i < n; ++i)
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

      const double e = error_norm(err, y, ynew, tol);
      if (!std::isfinite(e)) throw NumericalError("integrate: non-finite state at t = " + std::to_string(t));
      const double fac11 = std::pow(e, kExpo1);
      if (e <= 1.0) {
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
        double hnew = h / fac;
        facold = std::max(e, 1e-4);

        OdeSolution::Step st{t, h, std::vector<Vector>(5, Vector(n))};
        for (std::size_t i = 0; i < n; ++i) {
          const double ydiff = ynew[i] - y[i];
          const double bspl = h * k1[i] - ydiff;
          st.rcont[0][i] = y[i];
          st.rcont[1][i] = ydiff;
          st.rcont[2][i] = bspl;
          st.rcont[3][i] = ydiff - h * k7[i] - bspl;
          st.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        sol.push_step(std::move(st));

        y.swap(ynew);
        k1.swap(k7);  // first-same-as-last
        t = last ? t_end : t + h;
        if (last_rejected) hnew = std::min(hnew, h);
        last_rejected = false;
        if (!last) h_carry = hnew;
        h = hnew;
      } else {
        h /= std::min(1.0 / kFacMin, fac11 / kSafe);
        last_rejected = true;
        sol.add_rejected();
      }
    }
  }
  return sol;
}

OdeSolution integrate_ode(const RnnParams& params, const PiecewiseLinearPath& path, const OdeTolerance& tol) {
  params.validate();
  require(path.dim() == params.input(), "integrate_ode: path dimension does not match V");
  const std::size_t e = params.hidden();
  // The path is constant outside its breakpoints, linear between them.
  std::vector<double> bp{0.0};
  for (double t : path.times())
    if (t > bp.back()) bp.push_back(t);
  if (bp.back() < 1.0) bp.push_back(1.0);
  auto rhs = [&](std::size_t, double t, std::span<const double> y, std::span<double> dy) {
    const Vector x = path.evaluate(t);
    for (std::size_t i = 0; i < e; ++i) dy[i] = params.b[i];
    matvec_add(params.U, y, dy);
    matvec_add(params.V, x, dy);
    for (std::size_t i = 0; i < e; ++i) dy[i] = params.activation.value(dy[i]);
  };
  return integrate_piecewise(rhs, params.h0, bp, tol);
}

CdeField::CdeField(const RnnParams& params, double L)
    : params_(params), L_(L), e_(params.hidden()), d_(params.input()) {
  params_.validate();
  PathConfig{L}.validate();
}

Vector CdeField::column(std::size_t i, std::span<const double> hbar) const {
  require(i <= d_, "CdeField: column index out of range");
  require(hbar.size() == state_dim(), "CdeField: state dimension mismatch");
  Vector out(state_dim(), 0.0);
  if (i < d_) {
    out[e_ + i] = 1.0;
    return out;
  }
  const double scale = 2.0 / (1.0 - L_);
  for (std::size_t r = 0; r < e_; ++r) {
    double a = params_.b[r];
    a += simd::dot(params_.U.row(r), hbar.subspan(0, e_));
    a += simd::dot(params_.V.row(r), hbar.subspan(e_, d_));
    out[r] = scale * params_.activation.value(a);
  }
  return out;
}

Matrix CdeField::matrix(std::span<const double> hbar) const {
  Matrix m(state_dim(), control_dim());
  for (std::size_t i = 0; i <= d_; ++i) {
    const Vector c = column(i, hbar);
    for (std::size_t r = 0; r < c.size(); ++r) m(r, i) = c[r];
  }
  return m;
}

void CdeField::apply(std::span<const double> hbar, std::span<const double> v, std::span<double> out) const {
  require(v.size() == control_dim() && out.size() == state_dim(), "CdeField::apply: shape mismatch");
  const Vector last = column(d_, hbar);
  for (std::size_t r = 0; r < e_; ++r) out[r] = last[r] * v[d_];
  for (std::size_t i = 0; i < d_; ++i) out[e_ + i] = v[i];
}

OdeSolution integrate_cde(const RnnParams& params, const PiecewiseLinearPath& xbar, double L,
                          const OdeTolerance& tol) {
  const CdeField field(params, L);
  require(xbar.dim() == field.control_dim(), "integrate_cde: path must be time-augmented (dimension d + 1)");
  const auto times = xbar.times();
  const auto vals = xbar.values();
  require(times.size() >= 2, "integrate_cde: path needs at least two breakpoints");
  const std::size_t db = field.control_dim();
  std::vector<Vector> slopes(times.size() - 1, Vector(db));
  for (std::size_t k = 0; k + 1 < times.size(); ++k)
    for (std::size_t i = 0; i < db; ++i) slopes[k][i] = (vals[k + 1][i] - vals[k][i]) / (times[k + 1] - times[k]);
  auto rhs = [&](std::size_t seg, double, std::span<const double> y, std::span<double> dy) {
    field.apply(y, slopes[seg], dy);
  };
  Vector y0 = params.h0;
  y0.insert(y0.end(), vals[0].begin(), vals[0].begin() + static_cast<std::ptrdiff_t>(params.input()));
  std::vector<double> bp(times.begin(), times.end());
  return integrate_piecewise(rhs, std::move(y0), bp, tol);
}

BoundConstants compute_bound_constants(const RnnParams& params, double L) {
  params.validate();
  PathConfig{L}.validate();
  const LipschitzConstants lc = lipschitz_constants(params);
  const double kf = lc.K_f;
  const double ekf = std::exp(kf);
  BoundConstants bc{};
  bc.K_f = kf;
  const double h0n = norm(params.h0);
  if (params.activation.bounded()) {
    // Every coordinate of f lies in (-1, 1).
    const double s = std::sqrt(static_cast<double>(params.hidden()));
    bc.sup_f_h0 = s;
    bc.M = h0n + s * ekf;
    bc.sup_f = s;
  } else {
    Vector a = params.b;
    matvec_add(params.U, params.h0, a);
    const double opU = operator_norm(params.U);
    const double opV = operator_norm(params.V);
    bc.sup_f_h0 = norm(a) + L * opV;
    bc.M = h0n + bc.sup_f_h0 * ekf;
    bc.sup_f = opU * bc.M + opV * L + norm(params.b);
  }
  bc.c1 = kf * ekf * (L + bc.sup_f * ekf);
  return bc;
}

namespace {

EulerGap euler_gap_impl(const RnnParams& params, const PiecewiseLinearPath& path, std::span<const Vector> samples,
                        double L, const OdeTolerance& tol) {
  const std::size_t T = samples.size();
  const OdeSolution sol = integrate_ode(params, path, tol);
  const ForwardResult fwd = forward(params, samples);
  EulerGap g{0.0, 0.0, compute_bound_constants(params, L), std::vector<double>(T)};
  for (std::size_t j = 1; j <= T; ++j) {
    const Vector H = sol.evaluate(static_cast<double>(j) / static_cast<double>(T));
    double sq = 0.0;
    for (std::size_t i = 0; i < H.size(); ++i) sq += (H[i] - fwd.h[j][i]) * (H[i] - fwd.h[j][i]);
    g.per_step[j - 1] = std::sqrt(sq);
    g.gap = std::max(g.gap, g.per_step[j - 1]);
  }
  g.bound = g.constants.c1 / static_cast<double>(T);
  return g;
}

void require_in_input_space(const PiecewiseLinearPath& path, double L) {
  const double tv = total_variation(path);
  require(tv <= L * (1.0 + 1e-12) + 1e-15, "euler_gap: path total variation exceeds L; normalize it first");
  require(norm(path.values().front()) <= 1e-12, "euler_gap: path must start at 0");
}

}  // namespace

EulerGap euler_gap(const RnnParams& params, const PiecewiseLinearPath& path, std::size_t T, double L,
                   const OdeTolerance& tol) {
  require(T >= 1, "euler_gap: T must be positive");
  require_in_input_space(path, L);
  const std::vector<Vector> samples = path.sample(T);
  return euler_gap_impl(params, path, samples, L, tol);
}

EulerGap euler_gap(const RnnParams& params, std::span<const Vector> samples, double L, const OdeTolerance& tol) {
  const PiecewiseLinearPath path = from_samples(samples);
  require_in_input_space(path, L);
  return euler_gap_impl(params, path, samples, L, tol);
}

}  // namespace rnnsig
