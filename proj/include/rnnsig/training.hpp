#pragma once

// Spiral classification: data generation, full-batch Adam training with an
// optional RKHS-norm penalty, and an L2 (Frobenius) PGD attack.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "rnnsig/linalg.hpp"
#include "rnnsig/rnn.hpp"

namespace rnnsig {

using Sequence = std::vector<Vector>;

struct SpiralDataset {
  std::vector<Sequence> sequences;  // n sequences of T points in R^2
  std::vector<int> labels;          // +1 counter-clockwise, -1 clockwise
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return sequences.size(); }
};

// r = 0.25 + 0.75 t, angle = label * 4 pi t + phase, t = j / T (j = 1..T),
// phase uniform on [0, 2 pi), Gaussian noise of standard deviation `noise`.
// Labels alternate +1, -1, ... so the classes are balanced.
SpiralDataset make_spirals(std::size_t n, std::size_t T, std::uint64_t seed, double noise = 0.01);

// Scale every sequence by min(1, L / TV) of the polyline through 0, x_1..x_T,
// so that it is a valid model input.
SpiralDataset normalize_dataset(const SpiralDataset& data, double L);

void write_dataset_csv(const std::filesystem::path& file, const SpiralDataset& data);
SpiralDataset read_dataset_csv(const std::filesystem::path& file);

// log(1 + exp(-u)) and its derivative.
double logistic_loss(double u) noexcept;
double logistic_loss_derivative(double u) noexcept;

// 2 * 1(z > 0) - 1
int predict_label(double z) noexcept;

struct TrainConfig {
  std::size_t epochs = 200;
  double lr = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t lr_halving_period = 40;
  double lambda = 0.0;
  std::size_t penalty_depth = 3;
  double penalty_step = 1e-4;
  double L = 0.5;
  bool learn_h0 = true;

  void validate() const;
};

// Mean logistic loss of the final output, plus lambda ||alpha||^2 when
// lambda > 0.
struct Objective {
  double loss;       // data term
  double penalty;    // lambda ||alpha||^2
  double accuracy;
  double value() const noexcept { return loss + penalty; }
};

Objective evaluate_objective(const RnnParams& params, const SpiralDataset& data, const TrainConfig& config);

// Flat gradient (RnnParams::flatten layout) of the data term by
// backpropagation through time.
Vector data_gradient(const RnnParams& params, const SpiralDataset& data);

// Central finite differences of lambda ||alpha||^2 with the configured step.
Vector penalty_gradient(const RnnParams& params, double lambda, std::size_t depth, double L, double step = 1e-4);

// data_gradient + penalty_gradient (the latter only when lambda > 0); the h0
// block is zeroed when learn_h0 is false.
Vector total_gradient(const RnnParams& params, const SpiralDataset& data, const TrainConfig& config);

struct TraceRow {
  std::size_t epoch;
  double loss;
  double objective;
  double accuracy;
  double frob_norm;  // ||[U V]||_F
  double rkhs_norm;
};

struct TrainResult {
  RnnParams params;
  std::vector<TraceRow> trace;  // epochs 0..E, row 0 before any update
};

// trace_depth is the truncation used for the rkhs_norm column.
TrainResult train(const TrainConfig& config, const SpiralDataset& data, RnnParams init,
                  std::size_t trace_depth = 3);

void write_trace_csv(const std::filesystem::path& file, std::span<const TraceRow> trace);

double accuracy(const RnnParams& params, const SpiralDataset& data);

struct AttackConfig {
  double eps = 0.0;
  std::size_t steps = 50;
  // 0 selects 2.5 eps / steps.
  double step_size = 0.0;
};

struct AttackResult {
  SpiralDataset perturbed;  // final iterates
  double clean_accuracy;
  double adversarial_accuracy;
  double max_perturbation;  // largest ||delta||_F over the dataset
};

// Normalized-gradient ascent on the per-example loss, projected onto the
// Frobenius ball of radius eps around each sequence. An example counts as
// broken if any iterate is misclassified.
AttackResult pgd_attack(const RnnParams& params, const SpiralDataset& data, const AttackConfig& config);

}  // namespace rnnsig
