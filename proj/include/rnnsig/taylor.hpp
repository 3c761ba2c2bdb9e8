#pragma once

// Truncated jets of the CDE vector fields at a single point, star products
// F * G = J(G) F computed on those jets, and the step-N Taylor expansion
//
//   H^N_t = H_0 + sum_{k=1..N} (1/k!) sum_{|w| = k} S^w_{[0,t]} (F^{w_1} * ... * F^{w_k})(H_0)
//
// with factorial-normalized signature entries S^w and stars nested to the
// right: F^1 * F^2 * F^3 = F^1 * (F^2 * F^3).
//
// Letters and column indices are 0-based in this API: letter i < d is the
// constant injection of input channel i, letter d is the time column.

#include <cstddef>
#include <span>
#include <vector>

#include "rnnsig/linalg.hpp"
#include "rnnsig/ode.hpp"
#include "rnnsig/path.hpp"
#include "rnnsig/rnn.hpp"
#include "rnnsig/tensor.hpp"

namespace rnnsig {

struct DerivativeTower {
  Vector basepoint;
  // derivs[n] has order n + 1: axis 1 is the output component, the remaining
  // n axes are differentiation directions.
  std::vector<DenseTensor> derivs;

  std::size_t dim() const noexcept { return basepoint.size(); }
  std::size_t max_order() const noexcept { return derivs.size() - 1; }
  Vector value() const;
};

using Word = std::vector<std::size_t>;

DerivativeTower field_tower(const CdeField& field, std::size_t column, std::span<const double> basepoint,
                            std::size_t order);

// Jet of F * G = J(G) F at order g.max_order() - 1. Needs f.max_order() >= that.
DerivativeTower star_apply(const DerivativeTower& g, const DerivativeTower& f);

// (F^{w_1} * ... * F^{w_k})(hbar), via jets.
Vector iterated_star(const CdeField& field, const Word& word, std::span<const double> hbar);

// W_{w_k} ... W_{w_2} (W_{w_1} hbar + b_{w_1}); identity activation only.
Vector iterated_star_closed_form(const CdeField& field, const Word& word, std::span<const double> hbar);

// Values of every word up to length depth at hbar. levels[k] is a
// (dbar^k x ebar) matrix whose row r is the word with lexicographic index r
// (first letter most significant); levels[0] holds hbar itself.
struct StarTable {
  std::size_t control_dim;
  std::vector<Matrix> levels;

  std::size_t depth() const noexcept { return levels.size() - 1; }
};

StarTable all_word_stars(const CdeField& field, std::span<const double> hbar, std::size_t depth);

std::size_t word_index(const Word& word, std::size_t alphabet);
Word word_from_index(std::size_t index, std::size_t length, std::size_t alphabet);

// Initial CDE state (h0, X_0) for a time-augmented path.
Vector cde_initial_state(const RnnParams& params, const PiecewiseLinearPath& xbar);

// Hbar^N_t for a time-augmented path xbar.
Vector taylor_expansion(const RnnParams& params, const PiecewiseLinearPath& xbar, std::size_t depth, double t,
                        double L);
// Same, reusing a precomputed table (depth taken from it).
Vector taylor_expansion(const StarTable& table, const PiecewiseLinearPath& xbar, double t);

struct LambdaBound {
  double value;
  // Whether the radius condition ||W||_F < (1 - L) / (8 a^2 dbar) holds;
  // always true for the identity activation.
  bool applicable;
};

LambdaBound lambda_bound(const RnnParams& params, double L, std::size_t k);
// dbar^{N+1} / (N+1)! * Lambda_{N+1}
LambdaBound taylor_error_bound(const RnnParams& params, double L, std::size_t N);
double radius_limit(const RnnParams& params, double L);

// max over words of length k of ||F^{w_1} * ... * F^{w_k}(hbar)||, k = 0..depth.
// A point estimate at hbar, not the supremum over a ball.
std::vector<double> star_point_estimates(const StarTable& table);

}  // namespace rnnsig
