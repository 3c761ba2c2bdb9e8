#pragma once

// GRU and LSTM cells in residual form, h_{j+1} = h_j + (1/T) f(h_j, x_{j+1}).
//
// For the GRU, f = z * (n - h), which is the usual gated update minus h_j.
// For the LSTM the state is the stack (h, c) and f is (new state - old state).
// Only forward and reverse-mode passes are provided; there is no Taylor or
// kernel representation for these cells.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "rnnsig/linalg.hpp"

namespace rnnsig {

// Affine pre-activation W x + U h + b of one gate.
struct Gate {
  Matrix W;  // e x d
  Matrix U;  // e x e
  Vector b;  // e

  bool operator==(const Gate&) const = default;
};

struct GruParams {
  Gate r;     // reset, logistic
  Gate z;     // update, logistic
  Gate n;     // candidate, tanh; U acts as r * (U h + c_n)
  Vector cn;  // e
  Matrix psi; // p x e
  Vector h0;  // e

  std::size_t hidden() const noexcept { return r.U.rows(); }
  std::size_t input() const noexcept { return r.W.cols(); }
  std::size_t output() const noexcept { return psi.rows(); }
  void validate() const;

  std::size_t num_parameters() const noexcept;
  Vector flatten() const;
  void unflatten(std::span<const double> flat);

  static GruParams zeros(std::size_t hidden, std::size_t input, std::size_t output);
  static GruParams random(std::size_t hidden, std::size_t input, std::size_t output, std::mt19937_64& rng);
};

struct LstmParams {
  Gate i;     // input, logistic
  Gate f;     // forget, logistic
  Gate g;     // cell, tanh
  Gate o;     // output, logistic
  Matrix psi; // p x e, reads h only
  Vector h0;
  Vector c0;

  std::size_t hidden() const noexcept { return i.U.rows(); }
  std::size_t input() const noexcept { return i.W.cols(); }
  std::size_t output() const noexcept { return psi.rows(); }
  void validate() const;

  std::size_t num_parameters() const noexcept;
  Vector flatten() const;
  void unflatten(std::span<const double> flat);

  static LstmParams zeros(std::size_t hidden, std::size_t input, std::size_t output);
  static LstmParams random(std::size_t hidden, std::size_t input, std::size_t output, std::mt19937_64& rng);
};

struct GatedForward {
  // For the LSTM each state is (h, c) stacked, length 2e.
  std::vector<Vector> states;  // 0..T
  std::vector<Vector> z;       // z[j-1] = psi h_j
};

GatedForward gru_forward(const GruParams& params, std::span<const Vector> samples);
GatedForward lstm_forward(const LstmParams& params, std::span<const Vector> samples);

// Gradients are returned in the parameter layout (h0 / c0 hold the state
// gradients); input gradients in x.
struct GruGradients {
  GruParams params;
  std::vector<Vector> x;
};
struct LstmGradients {
  LstmParams params;
  std::vector<Vector> x;
};

GruGradients gru_backward(const GruParams& params, std::span<const Vector> samples, std::span<const Vector> grad_z);
LstmGradients lstm_backward(const LstmParams& params, std::span<const Vector> samples,
                            std::span<const Vector> grad_z);

}  // namespace rnnsig
