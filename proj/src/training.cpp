#include "rnnsig/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "rnnsig/error.hpp"
#include "rnnsig/path.hpp"
#include "rnnsig/rkhs.hpp"

namespace rnnsig {

SpiralDataset make_spirals(std::size_t n, std::size_t T, std::uint64_t seed, double noise) {
  require(n >= 1 && T >= 1, "make_spirals: n and T must be positive");
  require(noise >= 0.0, "make_spirals: noise must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise_dist(0.0, 1.0);
  SpiralDataset data;
  data.seed = seed;
  data.sequences.reserve(n);
  data.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = (i % 2 == 0) ? 1 : -1;
    const double phase = phase_dist(rng);
    Sequence seq;
    seq.reserve(T);
    for (std::size_t j = 1; j <= T; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(T);
      const double r = 0.25 + 0.75 * t;
      const double a = label * 4.0 * std::numbers::pi * t + phase;
      const double nx = noise * noise_dist(rng);
      const double ny = noise * noise_dist(rng);
      seq.push_back({r * std::cos(a) + nx, r * std::sin(a) + ny});
    }
    data.sequences.push_back(std::move(seq));
    data.labels.push_back(label);
  }
  return data;
}

SpiralDataset normalize_dataset(const SpiralDataset& data, double L) {
  PathConfig{L}.validate();
  SpiralDataset out = data;
  for (Sequence& seq : out.sequences) {
    const double tv = total_variation(from_samples(seq));
    const double s = tv > L ? L / tv : 1.0;
    for (Vector& x : seq)
      for (double& v : x) v *= s;
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& file, const SpiralDataset& data) {
  std::ofstream out(file);
  require(static_cast<bool>(out), "write_dataset_csv: cannot open " + file.string());
  out << std::setprecision(17) << "sample,label,j";
  const std::size_t d = data.sequences.empty() ? 0 : data.sequences.front().front().size();
  for (std::size_t c = 0; c < d; ++c) out << ",x" << c + 1;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.sequences[i].size(); ++j) {
      out << i << ',' << data.labels[i] << ',' << j + 1;
      for (double v : data.sequences[i][j]) out << ',' << v;
      out << '\n';
    }
  }
}

SpiralDataset read_dataset_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  require(static_cast<bool>(in), "read_dataset_csv: cannot open " + file.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "read_dataset_csv: empty file");
  SpiralDataset data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(row, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("read_dataset_csv: bad number on line " + std::to_string(lineno));
      }
    }
    require(cells.size() >= 4, "read_dataset_csv: too few columns on line " + std::to_string(lineno));
    const auto sample = static_cast<std::size_t>(cells[0]);
    if (sample == data.size()) {
      require(cells[1] == 1.0 || cells[1] == -1.0, "read_dataset_csv: labels must be +1 or -1");
      data.sequences.emplace_back();
      data.labels.push_back(static_cast<int>(cells[1]));
    }
    require(sample + 1 == data.size(), "read_dataset_csv: rows must be grouped by sample in order");
    data.sequences.back().emplace_back(cells.begin() + 3, cells.end());
  }
  require(data.size() > 0, "read_dataset_csv: no samples");
  return data;
}

double logistic_loss(double u) noexcept {
  return u > 0.0 ? std::log1p(std::exp(-u)) : -u + std::log1p(std::exp(u));
}

double logistic_loss_derivative(double u) noexcept { return -logistic(-u); }

int predict_label(double z) noexcept { return z > 0.0 ? 1 : -1; }

void TrainConfig::validate() const {
  require(lr > 0.0 && std::isfinite(lr), "TrainConfig: lr must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "TrainConfig: moment decays in [0, 1)");
  require(adam_eps > 0.0, "TrainConfig: epsilon must be positive");
  require(lr_halving_period >= 1, "TrainConfig: halving period must be positive");
  require(lambda >= 0.0 && std::isfinite(lambda), "TrainConfig: lambda must be non-negative");
  require(penalty_step > 0.0, "TrainConfig: penalty step must be positive");
  PathConfig{L}.validate();
}

namespace {

void check_dataset(const RnnParams& params, const SpiralDataset& data) {
  require(data.size() > 0, "dataset is empty");
  require(data.labels.size() == data.size(), "dataset labels do not match sequences");
  require(params.output() == 1, "binary classification needs a single output");
}

}  // namespace

Objective evaluate_objective(const RnnParams& params, const SpiralDataset& data, const TrainConfig& config) {
  check_dataset(params, data);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ForwardResult f = forward(params, data.sequences[i]);
    const double z = f.z.back()[0];
    loss += logistic_loss(data.labels[i] * z);
    correct += predict_label(z) == data.labels[i];
  }
  const double n = static_cast<double>(data.size());
  Objective o{loss / n, 0.0, static_cast<double>(correct) / n};
  if (config.lambda > 0.0) {
    const double r = rkhs_norm(params, config.L, config.penalty_depth);
    o.penalty = config.lambda * r * r;
  }
  return o;
}

Vector data_gradient(const RnnParams& params, const SpiralDataset& data) {
  check_dataset(params, data);
  Vector g(params.num_parameters(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sequence& x = data.sequences[i];
    const ForwardResult f = forward(params, x);
    std::vector<Vector> gz(x.size(), Vector(1, 0.0));
    const double y = data.labels[i];
    gz.back()[0] = inv_n * y * logistic_loss_derivative(y * f.z.back()[0]);
    const Vector gi = backward(params, x, f, gz).flatten();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += gi[k];
  }
  return g;
}

Vector penalty_gradient(const RnnParams& params, double lambda, std::size_t depth, double L, double step) {
  require(lambda >= 0.0, "penalty_gradient: lambda must be non-negative");
  require(step > 0.0, "penalty_gradient: step must be positive");
  const Vector theta = params.flatten();
  Vector g(theta.size(), 0.0);
  RnnParams probe = params;
  Vector shifted = theta;
  auto penalty_at = [&](const Vector& flat) {
    probe.unflatten(flat);
    const double r = rkhs_norm(probe, L, depth);
    return lambda * r * r;
  };
  for (std::size_t k = 0; k < theta.size(); ++k) {
    shifted[k] = theta[k] + step;
    const double up = penalty_at(shifted);
    shifted[k] = theta[k] - step;
    const double down = penalty_at(shifted);
    shifted[k] = theta[k];
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

Vector total_gradient(const RnnParams& params, const SpiralDataset& data, const TrainConfig& config) {
  Vector g = data_gradient(params, data);
  if (config.lambda > 0.0) {
    const Vector gp = penalty_gradient(params, config.lambda, config.penalty_depth, config.L, config.penalty_step);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += gp[k];
  }
  if (!config.learn_h0) {
    const std::size_t e = params.hidden();
    std::fill(g.end() - static_cast<std::ptrdiff_t>(e), g.end(), 0.0);
  }
  return g;
}

double accuracy(const RnnParams& params, const SpiralDataset& data) {
  check_dataset(params, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ForwardResult f = forward(params, data.sequences[i]);
    correct += predict_label(f.z.back()[0]) == data.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(const TrainConfig& config, const SpiralDataset& data, RnnParams init, std::size_t trace_depth) {
  config.validate();
  init.validate();
  check_dataset(init, data);
  TrainResult result{std::move(init), {}};
  RnnParams& p = result.params;

  auto record = [&](std::size_t epoch) {
    const Objective o = evaluate_objective(p, data, config);
    if (!std::isfinite(o.value())) {
      throw NumericalError("train: non-finite objective at epoch " + std::to_string(epoch));
    }
    result.trace.push_back(
        {epoch, o.loss, o.value(), o.accuracy, frobenius_norm(p.W()), rkhs_norm(p, config.L, trace_depth)});
  };

  record(0);
  Vector theta = p.flatten();
  Vector m(theta.size(), 0.0), v(theta.size(), 0.0);
  double b1t = 1.0, b2t = 1.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = config.lr * std::pow(0.5, static_cast<double>((epoch - 1) / config.lr_halving_period));
    const Vector g = total_gradient(p, data, config);
    b1t *= config.beta1;
    b2t *= config.beta2;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      if (!std::isfinite(g[k])) throw NumericalError("train: non-finite gradient at epoch " + std::to_string(epoch));
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double mh = m[k] / (1.0 - b1t);
      const double vh = v[k] / (1.0 - b2t);
      theta[k] -= lr * mh / (std::sqrt(vh) + config.adam_eps);
    }
    p.unflatten(theta);
    record(epoch);
  }
  return result;
}

void write_trace_csv(const std::filesystem::path& file, std::span<const TraceRow> trace) {
  std::ofstream out(file);
  require(static_cast<bool>(out), "write_trace_csv: cannot open " + file.string());
  out << std::setprecision(12) << "epoch,loss,acc,frob_norm,rkhs_norm\n";
  for (const TraceRow& r : trace)
    out << r.epoch << ',' << r.loss << ',' << r.accuracy << ',' << r.frob_norm << ',' << r.rkhs_norm << '\n';
}

AttackResult pgd_attack(const RnnParams& params, const SpiralDataset& data, const AttackConfig& config) {
  check_dataset(params, data);
  require(config.eps >= 0.0 && std::isfinite(config.eps), "pgd_attack: eps must be non-negative");
  require(config.step_size >= 0.0, "pgd_attack: step size must be non-negative");
  const double step = config.step_size > 0.0 ? config.step_size
                                             : 2.5 * config.eps / static_cast<double>(std::max<std::size_t>(config.steps, 1));
  AttackResult res{data, 0.0, 0.0, 0.0};
  std::size_t clean_correct = 0;
  std::size_t robust = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sequence& x0 = data.sequences[i];
    const double y = data.labels[i];
    Sequence x = x0;
    ForwardResult f = forward(params, x);
    const bool clean_ok = predict_label(f.z.back()[0]) == data.labels[i];
    clean_correct += clean_ok;
    bool broken = !clean_ok;
    if (config.eps > 0.0) {
      for (std::size_t s = 0; s < config.steps && !broken; ++s) {
        std::vector<Vector> gz(x.size(), Vector(1, 0.0));
        gz.back()[0] = y * logistic_loss_derivative(y * f.z.back()[0]);
        const RnnGradients g = backward(params, x, f, gz);
        double gn = 0.0;
        for (const Vector& r : g.x)
          for (double v : r) gn += v * v;
        gn = std::sqrt(gn);
        if (gn == 0.0) break;
        // Ascent step, then projection of delta = x - x0 onto the ball.
        double dn = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j)
          for (std::size_t c = 0; c < x[j].size(); ++c) {
            x[j][c] += step * g.x[j][c] / gn;
            const double dlt = x[j][c] - x0[j][c];
            dn += dlt * dlt;
          }
        dn = std::sqrt(dn);
        if (dn > config.eps) {
          const double s_proj = config.eps / dn;
          for (std::size_t j = 0; j < x.size(); ++j)
            for (std::size_t c = 0; c < x[j].size(); ++c) x[j][c] = x0[j][c] + s_proj * (x[j][c] - x0[j][c]);
        }
        f = forward(params, x);
        broken = predict_label(f.z.back()[0]) != data.labels[i];
      }
    }
    robust += !broken;
    double dn = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      for (std::size_t c = 0; c < x[j].size(); ++c) dn += (x[j][c] - x0[j][c]) * (x[j][c] - x0[j][c]);
    res.max_perturbation = std::max(res.max_perturbation, std::sqrt(dn));
    res.perturbed.sequences[i] = std::move(x);
  }
  const double n = static_cast<double>(data.size());
  res.clean_accuracy = static_cast<double>(clean_correct) / n;
  res.adversarial_accuracy = static_cast<double>(robust) / n;
  return res;
}

}  // namespace rnnsig
