#pragma once

// Truncated signatures of piecewise-linear paths.
//
// Two normalizations are in use. The standard one has level k equal to the
// k-fold iterated integral over the simplex; the factorial one multiplies
// level k by k!, so that a straight segment with increment b has level k equal
// to b^{(x)k}. Chen's identity S_{[s,u]} (x) S_{[u,t]} = S_{[s,t]} is a plain
// tensor-algebra product only in the standard normalization, so all
// accumulation happens there and conversion is applied at the end.

#include <cstddef>
#include <span>

#include "rnnsig/path.hpp"
#include "rnnsig/tensor.hpp"

namespace rnnsig {

enum class SigConvention { Standard, Factorial };

struct Signature {
  GradedTensorSeq seq;
  SigConvention convention = SigConvention::Factorial;

  std::size_t dim() const noexcept { return seq.dim(); }
  std::size_t depth() const noexcept { return seq.depth(); }
};

// Multiplies level k by k! (to Factorial) or 1/k! (to Standard).
Signature convert(const Signature& sig, SigConvention to);

Signature segment_signature(std::span<const double> delta, std::size_t depth,
                            SigConvention convention = SigConvention::Factorial);

Signature signature(const PiecewiseLinearPath& path, std::size_t depth, double s = 0.0, double t = 1.0,
                    SigConvention convention = SigConvention::Factorial);

// Chen product of two signatures given in the same convention; the result is
// in that convention too.
Signature chen(const Signature& a, const Signature& b);

// In place: S <- S (x) exp(delta), S in the standard convention.
void append_segment(GradedTensorSeq& standard_sig, std::span<const double> delta);

double sig_norm(const Signature& sig);

// <S(Xbar), S(Ybar)> at the given depth, factorial convention, where Xbar is X
// with the time channel appended.
double sig_kernel(const PiecewiseLinearPath& x, const PiecewiseLinearPath& y, std::size_t depth,
                  const PathConfig& config);

}  // namespace rnnsig
