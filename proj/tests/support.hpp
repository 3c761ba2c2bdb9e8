#pragma once

// Shared generators for property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rnnsig/linalg.hpp"
#include "rnnsig/path.hpp"
#include "rnnsig/rnn.hpp"
#include "rnnsig/tensor.hpp"

namespace testsupport {

using rnnsig::Matrix;
using rnnsig::Vector;

inline std::mt19937_64 rng_for(std::uint64_t seed) { return std::mt19937_64(seed * 0x9E3779B97F4A7C15ULL + 7); }

inline double uniform(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = scale * uniform(rng);
  return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  return Matrix(r, c, random_vector(rng, r * c, scale));
}

inline rnnsig::DenseTensor random_tensor(std::mt19937_64& rng, std::size_t dim, std::size_t order) {
  return rnnsig::DenseTensor(dim, order, random_vector(rng, rnnsig::tensor_size(dim, order)));
}

inline rnnsig::GradedTensorSeq random_seq(std::mt19937_64& rng, std::size_t dim, std::size_t depth) {
  std::vector<rnnsig::DenseTensor> levels;
  for (std::size_t k = 0; k <= depth; ++k) levels.push_back(random_tensor(rng, dim, k));
  return rnnsig::GradedTensorSeq(std::move(levels));
}

// Random polyline on [0, 1] with T equal segments, starting at the origin.
inline rnnsig::PiecewiseLinearPath random_path(std::mt19937_64& rng, std::size_t d, std::size_t T,
                                               double step = 1.0) {
  std::vector<Vector> samples;
  Vector x(d, 0.0);
  for (std::size_t j = 0; j < T; ++j) {
    for (double& v : x) v += step * uniform(rng);
    samples.push_back(x);
  }
  return rnnsig::from_samples(samples);
}

inline rnnsig::PiecewiseLinearPath random_normalized_path(std::mt19937_64& rng, std::size_t d, std::size_t T,
                                                          double L) {
  return rnnsig::normalize(random_path(rng, d, T), rnnsig::PathConfig{L}).path;
}

inline rnnsig::RnnParams random_params(std::mt19937_64& rng, std::size_t e, std::size_t d, std::size_t p,
                                       rnnsig::Activation act, double scale = 1.0) {
  rnnsig::RnnParams params{random_matrix(rng, e, e, scale), random_matrix(rng, e, d, scale),
                           random_vector(rng, e, scale),     random_matrix(rng, p, e, scale),
                           random_vector(rng, e, scale),     act};
  return params;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double vec_norm(const Vector& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

}  // namespace testsupport
