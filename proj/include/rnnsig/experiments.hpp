#pragma once

// The three experiment drivers behind the command-line tool. Each one is a
// pure function of its config (seed included) and returns plain rows that the
// CSV writers below serialize with fixed headers.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rnnsig/activation.hpp"
#include "rnnsig/ode.hpp"
#include "rnnsig/training.hpp"

namespace rnnsig {

// Runs job(i) for i in [0, count) on up to `workers` threads (0 = hardware
// concurrency). Jobs must write to disjoint outputs.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job);

// --- Taylor convergence -----------------------------------------------------

struct TaylorConvergenceConfig {
  std::uint64_t seed = 0;
  std::size_t runs = 100;  // per activation
  std::size_t hidden = 2;
  std::size_t max_depth = 5;
  std::size_t path_points = 100;
  double L = 0.5;
  // ||W||_F of each draw is log-uniform on [frob_min, frob_max].
  double frob_min = 1e-3;
  double frob_max = 3.0;
  std::vector<Activation> activations{Activation(ActivationKind::Logistic), Activation(ActivationKind::Tanh)};
  OdeTolerance reference{1e-14, 1e-13};
  std::size_t workers = 0;

  void validate() const;
};

struct TaylorRow {
  std::size_t run_id;
  double frob_norm;
  std::string activation;
  std::size_t N;
  double error;  // ||H_1 - H^N_1|| on the hidden block
  bool within_radius;
  double bound;  // analytic error bound (meaningful when within_radius)
};

std::vector<TaylorRow> taylor_convergence(const TaylorConvergenceConfig& config);

// The input path used by taylor_convergence: one normalized spiral.
PiecewiseLinearPath taylor_spiral_path(std::uint64_t seed, std::size_t points, double L);

// Header: run_id,frob_norm,activation,N,error
void write_taylor_csv(const std::filesystem::path& file, std::span<const TaylorRow> rows);

// Least-squares slope of log10(error) against N for one run.
double log_error_slope(std::span<const TaylorRow> run_rows);

struct TaylorSummary {
  std::vector<std::string> activations;
  std::vector<std::vector<double>> median_log_error;  // [activation][N - 1]
  std::size_t radius_runs = 0;           // runs whose weights satisfy the radius condition
  std::size_t radius_negative_slope = 0;  // of those, runs with a negative log-error slope
  std::size_t bound_checks = 0;          // (run, N) pairs inside the radius
  std::size_t bound_violations = 0;
  std::size_t bound_max_depth = 4;       // bound compared for N <= this
};

TaylorSummary summarize_taylor(std::span<const TaylorRow> rows, std::size_t bound_max_depth = 4);

// --- Euler gap ----------------------------------------------------------------

struct EulerGapConfig {
  std::uint64_t seed = 0;
  std::size_t runs = 20;
  std::size_t hidden = 2;
  std::vector<std::size_t> T{16, 32, 64, 128};
  std::size_t path_points = 200;
  double L = 0.5;
  double weight_scale = 1.0;  // U, V, b, h0 uniform on [-scale, scale]
  Activation activation{ActivationKind::Logistic};
  OdeTolerance reference{1e-13, 1e-12};
  std::size_t workers = 0;

  void validate() const;
};

struct EulerRow {
  std::size_t run_id;
  std::size_t T;
  double gap;
  double bound;
};

std::vector<EulerRow> euler_gap_experiment(const EulerGapConfig& config);

// Header: run_id,T,gap,bound
void write_euler_csv(const std::filesystem::path& file, std::span<const EulerRow> rows);

struct EulerSummary {
  std::size_t rows = 0;
  std::size_t within_bound = 0;
  // Ratio gap(T_prev) / gap(T_last) for the two largest T values, one per run.
  std::vector<double> last_ratios;
  std::size_t ratios_in_band = 0;  // ratios in [1.5, 2.5]
};

EulerSummary summarize_euler(std::span<const EulerRow> rows);

// --- Training and adversarial accuracy --------------------------------------

struct TrainAttackConfig {
  std::uint64_t seed = 0;
  std::size_t seeds = 5;
  std::size_t hidden = 8;
  std::size_t n_train = 50;
  std::size_t n_test = 50;
  std::size_t T = 100;
  double lambda = 0.1;
  Activation activation{ActivationKind::Tanh};
  TrainConfig train;  // lambda is overwritten per arm
  std::vector<double> eps_grid{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  std::size_t attack_steps = 50;
  // Rescale every spiral into the input space (TV <= L) before training and attacking.
  bool normalize_inputs = false;
  std::size_t workers = 0;

  void validate() const;
};

struct AttackRow {
  std::size_t seed_index;
  double lambda;
  double eps;
  double clean_accuracy;
  double adv_accuracy;
};

struct TrainAttackRun {
  std::size_t seed_index;
  double lambda;
  TrainResult result;
};

struct TrainAttackResult {
  std::vector<TrainAttackRun> runs;  // (seed 0, lambda 0), (seed 0, lambda), ...
  std::vector<AttackRow> attacks;
};

TrainAttackResult train_attack(const TrainAttackConfig& config);

// Header: seed,lambda,eps,clean_accuracy,adv_accuracy
void write_attack_csv(const std::filesystem::path& file, std::span<const AttackRow> rows);

// Mean adversarial accuracy over seeds for one arm at one eps.
double mean_adv_accuracy(std::span<const AttackRow> rows, double lambda, double eps);

}  // namespace rnnsig
