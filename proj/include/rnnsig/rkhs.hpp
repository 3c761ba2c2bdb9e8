#pragma once

// Linear model in signature space induced by a feedforward RNN:
//
//   xi(X) = <alpha, S(Xbar)>,   alpha_k^w = (1/k!) psi Proj(F^{w_1} * ... * F^{w_k}(Hbar_0)),
//
// one coefficient series per output channel, with alpha_0 = psi h0.

#include <cstddef>
#include <optional>
#include <vector>

#include "rnnsig/path.hpp"
#include "rnnsig/rnn.hpp"
#include "rnnsig/signature.hpp"
#include "rnnsig/taylor.hpp"
#include "rnnsig/tensor.hpp"

namespace rnnsig {

struct AlphaSeries {
  std::size_t depth;
  double L;
  // One series over R^{d+1} per output channel.
  std::vector<GradedTensorSeq> channels;
  RnnParams params;

  std::size_t outputs() const noexcept { return channels.size(); }
  std::size_t control_dim() const noexcept { return channels.front().dim(); }
};

// Hbar_0 = (h0, 0), i.e. the input path is assumed to start at the origin.
AlphaSeries alpha_series(const RnnParams& params, double L, std::size_t depth);
AlphaSeries alpha_series(const RnnParams& params, double L, const StarTable& table);

struct StopIndex {
  std::size_t j;
  std::size_t T;
};

// x is a normalized input path (not time-augmented). With a stop index the
// signature is taken over [0, j/T].
Vector rkhs_predict(const AlphaSeries& alpha, const PiecewiseLinearPath& x,
                    std::optional<StopIndex> stop = std::nullopt);
// Same against a precomputed factorial signature of the augmented path.
Vector rkhs_predict(const AlphaSeries& alpha, const Signature& sig);

double rkhs_norm(const AlphaSeries& alpha);
double rkhs_norm(const RnnParams& params, double L, std::size_t depth);

double penalized_loss(double base_loss, const RnnParams& params, double lambda, std::size_t depth, double L);

struct StabilityGap {
  double gap;    // ||xi(X) - xi(X')||
  double bound;  // ||alpha|| ||S(Xbar) - S(Xbar')||
};

StabilityGap stability_gap(const RnnParams& params, double L, std::size_t depth, const PiecewiseLinearPath& x,
                           const PiecewiseLinearPath& x_prime);

struct AlphaNormBound {
  // ||psi||_op sqrt(sum_{k <= depth} (dbar^k Lambda_k / k!)^2), Lambda_0 := ||h0||
  double value;
  bool applicable;
};

AlphaNormBound alpha_norm_bound(const RnnParams& params, double L, std::size_t depth);

// ||psi||_op times the Taylor remainder bound at depth N: controls
// |<alpha_{>N}, S_{>N}(Xbar)>|.
AlphaNormBound truncation_tail(const RnnParams& params, double L, std::size_t depth);

}  // namespace rnnsig
