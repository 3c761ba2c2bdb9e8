#pragma once

// Continuous-time counterparts of the residual RNN:
//
//   dH_t = f(H_t, X_t) dt                      (ODE limit)
//   dHbar_t = F(Hbar_t) dXbar_t                 (CDE form, Hbar = (H, X))
//
// solved with an adaptive Dormand-Prince 5(4) pair. Inputs are piecewise
// linear, so integration restarts at every breakpoint and each step sees a
// smooth right-hand side.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rnnsig/linalg.hpp"
#include "rnnsig/path.hpp"
#include "rnnsig/rnn.hpp"

namespace rnnsig {

struct OdeTolerance {
  double atol = 1e-10;
  double rtol = 1e-8;
  // Hard cap on accepted plus rejected steps.
  std::size_t max_steps = 1'000'000;

  void validate() const;
};

// Dense output: one quartic-in-s interpolant per accepted step.
class OdeSolution {
 public:
  struct Step {
    double t0;
    double h;
    std::vector<Vector> rcont;  // 5 coefficient vectors
  };

  OdeSolution(Vector y0, OdeTolerance tol) : y0_(std::move(y0)), tol_(tol) {}

  std::size_t dim() const noexcept { return y0_.size(); }
  const Vector& initial() const noexcept { return y0_; }
  Vector final_value() const;
  Vector evaluate(double t) const;

  std::size_t step_count() const noexcept { return steps_.size(); }
  std::size_t rejected_count() const noexcept { return rejected_; }
  const OdeTolerance& tolerance() const noexcept { return tol_; }
  std::span<const Step> steps() const noexcept { return steps_; }

  void push_step(Step step) { steps_.push_back(std::move(step)); }
  void add_rejected() noexcept { ++rejected_; }

 private:
  Vector y0_;
  OdeTolerance tol_;
  std::vector<Step> steps_;
  std::size_t rejected_ = 0;
};

// dy = rhs(segment, t, y). The segment index k refers to the interval
// [breakpoints[k], breakpoints[k+1]] that contains the whole step.
using SegmentRhs = std::function<void(std::size_t segment, double t, std::span<const double> y, std::span<double> dy)>;

// Integrates over [breakpoints.front(), breakpoints.back()].
OdeSolution integrate_piecewise(const SegmentRhs& rhs, Vector y0, std::span<const double> breakpoints,
                                const OdeTolerance& tol);

OdeSolution integrate_ode(const RnnParams& params, const PiecewiseLinearPath& path, const OdeTolerance& tol = {});

// Tensor field F : R^{e+d} -> R^{(e+d) x (d+1)} whose columns are the vector
// fields F^1..F^{d+1}. Columns are 0-indexed in this API.
class CdeField {
 public:
  CdeField(const RnnParams& params, double L);

  std::size_t state_dim() const noexcept { return e_ + d_; }
  std::size_t control_dim() const noexcept { return d_ + 1; }
  std::size_t hidden() const noexcept { return e_; }
  std::size_t input() const noexcept { return d_; }
  double L() const noexcept { return L_; }
  const RnnParams& params() const noexcept { return params_; }

  // F^{i+1}(hbar).
  Vector column(std::size_t i, std::span<const double> hbar) const;
  // F(hbar) as a matrix.
  Matrix matrix(std::span<const double> hbar) const;
  // out = F(hbar) v
  void apply(std::span<const double> hbar, std::span<const double> v, std::span<double> out) const;

 private:
  RnnParams params_;
  double L_;
  std::size_t e_;
  std::size_t d_;
};

inline CdeField cde_field(const RnnParams& params, double L) { return CdeField(params, L); }

// xbar must be time-augmented (dimension d + 1). The initial state is
// (h0, X_0).
OdeSolution integrate_cde(const RnnParams& params, const PiecewiseLinearPath& xbar, double L,
                          const OdeTolerance& tol = {});

struct BoundConstants {
  double K_f;
  // sup over ||x|| <= L of ||f(h0, x)||, or an upper bound of it.
  double sup_f_h0;
  // State radius: ||H_t|| <= M on [0, 1].
  double M;
  // sup of ||f(h, x)|| over ||h|| <= M, ||x|| <= L, or an upper bound of it.
  double sup_f;
  double c1;
};

BoundConstants compute_bound_constants(const RnnParams& params, double L);

struct EulerGap {
  double gap;    // max_j ||H_{j/T} - h_j||
  double bound;  // c1 / T
  BoundConstants constants;
  std::vector<double> per_step;  // ||H_{j/T} - h_j||, j = 1..T
};

// The RNN reads x_j = X_{j/T}; the ODE is driven by the continuous path X.
EulerGap euler_gap(const RnnParams& params, const PiecewiseLinearPath& path, std::size_t T, double L,
                   const OdeTolerance& tol = {});
// Same with X the polyline through 0, x_1, ..., x_T.
EulerGap euler_gap(const RnnParams& params, std::span<const Vector> samples, double L, const OdeTolerance& tol = {});

}  // namespace rnnsig
