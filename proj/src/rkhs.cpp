#include "rnnsig/rkhs.hpp"

#include <cmath>

#include "rnnsig/error.hpp"
#include "rnnsig/simd/kernels.hpp"

namespace rnnsig {

namespace {

Vector origin_state(const RnnParams& params) {
  Vector h = params.h0;
  h.resize(params.hidden() + params.input(), 0.0);
  return h;
}

}  // namespace

AlphaSeries alpha_series(const RnnParams& params, double L, const StarTable& table) {
  params.validate();
  const std::size_t e = params.hidden();
  const std::size_t p = params.output();
  const std::size_t db = params.input() + 1;
  require(table.control_dim == db, "alpha_series: star table does not match the parameters");
  AlphaSeries a{table.depth(), L, std::vector<GradedTensorSeq>(p, GradedTensorSeq(db, table.depth())), params};
  double fact = 1.0;
  for (std::size_t k = 0; k <= table.depth(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    const Matrix& vals = table.levels[k];
    for (std::size_t r = 0; r < vals.rows(); ++r) {
      // psi acts on the first e coordinates only.
      const auto proj = vals.row(r).subspan(0, e);
      for (std::size_t l = 0; l < p; ++l) a.channels[l].level(k)[r] = simd::dot(params.psi.row(l), proj) / fact;
    }
  }
  return a;
}

AlphaSeries alpha_series(const RnnParams& params, double L, std::size_t depth) {
  const CdeField field(params, L);
  return alpha_series(params, L, all_word_stars(field, origin_state(params), depth));
}

Vector rkhs_predict(const AlphaSeries& alpha, const Signature& sig) {
  require(sig.dim() == alpha.control_dim(), "rkhs_predict: signature dimension mismatch");
  require(sig.depth() >= alpha.depth, "rkhs_predict: signature is shallower than alpha");
  const Signature s = convert(sig, SigConvention::Factorial);
  Vector out(alpha.outputs());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = seq_inner(alpha.channels[l], s.seq);
  return out;
}

Vector rkhs_predict(const AlphaSeries& alpha, const PiecewiseLinearPath& x, std::optional<StopIndex> stop) {
  require(x.dim() + 1 == alpha.control_dim(), "rkhs_predict: path dimension mismatch");
  const PiecewiseLinearPath xbar = time_augment(x, PathConfig{alpha.L});
  double t = 1.0;
  if (stop) {
    require(stop->T >= 1 && stop->j >= 1 && stop->j <= stop->T, "rkhs_predict: need 1 <= j <= T");
    t = static_cast<double>(stop->j) / static_cast<double>(stop->T);
  }
  return rkhs_predict(alpha, signature(xbar, alpha.depth, 0.0, t));
}

double rkhs_norm(const AlphaSeries& alpha) {
  double s = 0.0;
  for (const GradedTensorSeq& c : alpha.channels) s += seq_inner(c, c);
  return std::sqrt(s);
}

double rkhs_norm(const RnnParams& params, double L, std::size_t depth) {
  return rkhs_norm(alpha_series(params, L, depth));
}

double penalized_loss(double base_loss, const RnnParams& params, double lambda, std::size_t depth, double L) {
  require(lambda >= 0.0, "penalized_loss: lambda must be non-negative");
  if (lambda == 0.0) return base_loss;
  const double n = rkhs_norm(params, L, depth);
  return base_loss + lambda * n * n;
}

StabilityGap stability_gap(const RnnParams& params, double L, std::size_t depth, const PiecewiseLinearPath& x,
                           const PiecewiseLinearPath& x_prime) {
  require(x.dim() == x_prime.dim(), "stability_gap: paths differ in dimension");
  const AlphaSeries alpha = alpha_series(params, L, depth);
  const PathConfig cfg{L};
  const Signature s1 = signature(time_augment(x, cfg), depth);
  const Signature s2 = signature(time_augment(x_prime, cfg), depth);
  const Vector y1 = rkhs_predict(alpha, s1);
  const Vector y2 = rkhs_predict(alpha, s2);
  double gap = 0.0;
  for (std::size_t l = 0; l < y1.size(); ++l) gap += (y1[l] - y2[l]) * (y1[l] - y2[l]);
  GradedTensorSeq diff = s1.seq;
  diff.add_scaled(s2.seq, -1.0);
  return {std::sqrt(gap), rkhs_norm(alpha) * seq_norm(diff)};
}

AlphaNormBound alpha_norm_bound(const RnnParams& params, double L, std::size_t depth) {
  const double db = static_cast<double>(params.input() + 1);
  double sum = 0.0;
  double coef = 1.0;  // dbar^k / k!
  bool applicable = true;
  for (std::size_t k = 0; k <= depth; ++k) {
    if (k > 0) coef *= db / static_cast<double>(k);
    const LambdaBound lb = lambda_bound(params, L, k);
    applicable = applicable && lb.applicable;
    sum += (coef * lb.value) * (coef * lb.value);
  }
  return {operator_norm(params.psi) * std::sqrt(sum), applicable};
}

AlphaNormBound truncation_tail(const RnnParams& params, double L, std::size_t depth) {
  const LambdaBound lb = taylor_error_bound(params, L, depth);
  return {operator_norm(params.psi) * lb.value, lb.applicable};
}

}  // namespace rnnsig
