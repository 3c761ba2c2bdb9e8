#pragma once

// Residual feedforward recurrent network
//
//   h_{j+1} = h_j + (1/T) sigma(U h_j + V x_{j+1} + b),   z_j = psi h_j,
//
// with exact reverse-mode gradients of the unrolled recursion.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "rnnsig/activation.hpp"
#include "rnnsig/linalg.hpp"

namespace rnnsig {

struct RnnParams {
  Matrix U;    // e x e
  Matrix V;    // e x d
  Vector b;    // e
  Matrix psi;  // p x e
  Vector h0;   // e
  Activation activation;

  std::size_t hidden() const noexcept { return U.rows(); }
  std::size_t input() const noexcept { return V.cols(); }
  std::size_t output() const noexcept { return psi.rows(); }

  // Throws ValidationError on inconsistent shapes.
  void validate() const;

  // W = [U V], e x (e + d).
  Matrix W() const { return hconcat(U, V); }

  // Flat view in the order U, V, b, psi, h0 (row-major matrices).
  std::size_t num_parameters() const noexcept;
  Vector flatten() const;
  void unflatten(std::span<const double> flat);

  bool operator==(const RnnParams&) const = default;
};

RnnParams zero_params(std::size_t hidden, std::size_t input, std::size_t output, Activation activation);

// Uniform(-1/sqrt(e), 1/sqrt(e)) for U, V, b and psi; h0 = 0.
RnnParams init_params(std::size_t hidden, std::size_t input, std::size_t output, Activation activation,
                      std::mt19937_64& rng);

struct ForwardResult {
  std::vector<Vector> h;    // h_0..h_T
  std::vector<Vector> pre;  // pre[j] = U h_j + V x_{j+1} + b, j = 0..T-1
  std::vector<Vector> z;    // z[j-1] = psi h_j, j = 1..T
};

ForwardResult forward(const RnnParams& params, std::span<const Vector> samples);

struct RnnGradients {
  Matrix U;
  Matrix V;
  Vector b;
  Matrix psi;
  Vector h0;
  std::vector<Vector> x;  // gradient with respect to each input sample

  Vector flatten() const;
};

// grad_z[j-1] is the upstream gradient on z_j.
RnnGradients backward(const RnnParams& params, std::span<const Vector> samples, const ForwardResult& fwd,
                      std::span<const Vector> grad_z);

struct LipschitzConstants {
  double K_h;
  double K_x;
  double K_f;
};

LipschitzConstants lipschitz_constants(const RnnParams& params);

// f(h, x) = sigma(U h + V x + b)
Vector cell(const RnnParams& params, std::span<const double> h, std::span<const double> x);

}  // namespace rnnsig
