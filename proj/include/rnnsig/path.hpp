#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "rnnsig/linalg.hpp"

namespace rnnsig {

// Total-variation budget L of the input space: paths start at 0 and have
// length at most L, with 0 < L < 1.
struct PathConfig {
  double L = 0.5;

  void validate() const;
};

// Continuous piecewise-linear path on [0, 1] through (times[k], values[k]).
//
// A single breakpoint is allowed and denotes a constant path.
class PiecewiseLinearPath {
 public:
  PiecewiseLinearPath(std::vector<double> times, std::vector<Vector> values);

  std::size_t dim() const noexcept { return values_.front().size(); }
  std::size_t num_points() const noexcept { return times_.size(); }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const Vector> values() const noexcept { return values_; }

  Vector evaluate(double t) const;

  // The same path restricted to [s, t], with breakpoints at s, t and every
  // original breakpoint strictly in between. Times are not rescaled.
  PiecewiseLinearPath restrict_to(double s, double t) const;

  // Path samples at j/T, j = 1..T.
  std::vector<Vector> sample(std::size_t T) const;

 private:
  std::vector<double> times_;
  std::vector<Vector> values_;
};

// Breakpoints 0, 1/T, ..., 1 with the basepoint 0 at t = 0 and x_j at j/T.
PiecewiseLinearPath from_samples(std::span<const Vector> samples);

double total_variation(const PiecewiseLinearPath& path, double s = 0.0, double t = 1.0);

struct NormalizedPath {
  PiecewiseLinearPath path;
  // Factor applied to the translated values.
  double scale;
};

// Translate so the path starts at 0 and scale values by min(1, L / TV).
NormalizedPath normalize(const PiecewiseLinearPath& path, const PathConfig& config);

// Appends the channel ((1 - L) / 2) t.
PiecewiseLinearPath time_augment(const PiecewiseLinearPath& path, const PathConfig& config);

// Equal to the path on [0, j/T], constant afterwards.
PiecewiseLinearPath stop_at(const PiecewiseLinearPath& path, std::size_t j, std::size_t T);

// Samples from CSV: one row per time step, one column per channel, optional
// header row (detected when the first row does not parse as numbers).
std::vector<Vector> read_samples_csv(const std::filesystem::path& file);
void write_samples_csv(const std::filesystem::path& file, std::span<const Vector> samples);

}  // namespace rnnsig
