#include "rnnsig/signature.hpp"

#include "rnnsig/error.hpp"
#include "rnnsig/simd/kernels.hpp"

namespace rnnsig {

Signature convert(const Signature& sig, SigConvention to) {
  if (sig.convention == to) return sig;
  Signature out{sig.seq, to};
  double fact = 1.0;
  for (std::size_t k = 1; k <= out.seq.depth(); ++k) {
    fact *= static_cast<double>(k);
    out.seq.level(k).scale(to == SigConvention::Factorial ? fact : 1.0 / fact);
  }
  return out;
}

void append_segment(GradedTensorSeq& s, std::span<const double> delta) {
  const std::size_t d = s.dim();
  require(delta.size() == d, "append_segment: increment dimension mismatch");
  const std::size_t depth = s.depth();
  // Horner: new_k = ((S_0 D/k + S_1) D/(k-1) + ... + S_{k-1}) D/1 + S_k.
  // Levels are overwritten from the top so lower ones are still the old ones.
  std::vector<double> acc;
  std::vector<double> next;
  for (std::size_t k = depth; k >= 1; --k) {
    acc.assign(1, s.level(0)[0]);
    for (std::size_t i = 0; i < k; ++i) {
      if (i > 0) simd::axpy(1.0, s.level(i).data(), acc);
      const double c = 1.0 / static_cast<double>(k - i);
      next.assign(acc.size() * d, 0.0);
      for (std::size_t m = 0; m < acc.size(); ++m) {
        if (acc[m] == 0.0) continue;
        simd::axpy(acc[m] * c, delta, std::span(next).subspan(m * d, d));
      }
      acc.swap(next);
    }
    simd::axpy(1.0, acc, s.level(k).data());
  }
}

Signature segment_signature(std::span<const double> delta, std::size_t depth, SigConvention convention) {
  require(!delta.empty(), "segment_signature: empty increment");
  GradedTensorSeq s = GradedTensorSeq::unit(delta.size(), depth);
  append_segment(s, delta);
  return convert(Signature{std::move(s), SigConvention::Standard}, convention);
}

Signature signature(const PiecewiseLinearPath& path, std::size_t depth, double s, double t,
                    SigConvention convention) {
  require(s >= 0.0 && s <= t && t <= 1.0, "signature: interval must satisfy 0 <= s <= t <= 1");
  const std::size_t d = path.dim();
  GradedTensorSeq sig = GradedTensorSeq::unit(d, depth);
  if (s < t && depth > 0) {
    const PiecewiseLinearPath r = path.restrict_to(s, t);
    const auto vals = r.values();
    Vector delta(d);
    for (std::size_t k = 1; k < vals.size(); ++k) {
      bool zero = true;
      for (std::size_t i = 0; i < d; ++i) {
        delta[i] = vals[k][i] - vals[k - 1][i];
        zero = zero && delta[i] == 0.0;
      }
      if (!zero) append_segment(sig, delta);
    }
  }
  return convert(Signature{std::move(sig), SigConvention::Standard}, convention);
}

Signature chen(const Signature& a, const Signature& b) {
  require(a.convention == b.convention, "chen: conventions differ");
  const Signature as = convert(a, SigConvention::Standard);
  const Signature bs = convert(b, SigConvention::Standard);
  return convert(Signature{tensor_algebra_product(as.seq, bs.seq), SigConvention::Standard}, a.convention);
}

double sig_norm(const Signature& sig) { return seq_norm(sig.seq); }

double sig_kernel(const PiecewiseLinearPath& x, const PiecewiseLinearPath& y, std::size_t depth,
                  const PathConfig& config) {
  require(x.dim() == y.dim(), "sig_kernel: paths differ in dimension");
  const Signature sx = signature(time_augment(x, config), depth);
  const Signature sy = signature(time_augment(y, config), depth);
  return seq_inner(sx.seq, sy.seq);
}

}  // namespace rnnsig
