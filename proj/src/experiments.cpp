#include "rnnsig/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "rnnsig/error.hpp"
#include "rnnsig/path.hpp"
#include "rnnsig/rkhs.hpp"
#include "rnnsig/taylor.hpp"

namespace rnnsig {

namespace {

// Independent stream per (base, a, b).
std::mt19937_64 derived_rng(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

std::uint64_t derived_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) { return derived_rng(base, a, b)(); }

void fill_uniform(std::span<double> out, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : out) v = u(rng);
}

std::ofstream open_csv(const std::filesystem::path& file) {
  std::ofstream out(file);
  require(static_cast<bool>(out), "cannot open " + file.string() + " for writing");
  out << std::setprecision(12);
  return out;
}

}  // namespace

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// --- Taylor convergence -----------------------------------------------------

void TaylorConvergenceConfig::validate() const {
  PathConfig{L}.validate();
  require(runs >= 1 && hidden >= 1 && path_points >= 1, "taylor-convergence: runs, hidden and points must be positive");
  require(max_depth >= 1 && max_depth <= 8, "taylor-convergence: max depth must lie in [1, 8]");
  require(frob_min > 0.0 && frob_max >= frob_min, "taylor-convergence: need 0 < frob_min <= frob_max");
  require(!activations.empty(), "taylor-convergence: no activation selected");
  reference.validate();
}

PiecewiseLinearPath taylor_spiral_path(std::uint64_t seed, std::size_t points, double L) {
  const SpiralDataset one = make_spirals(1, points, seed);
  return normalize(from_samples(one.sequences.front()), PathConfig{L}).path;
}

std::vector<TaylorRow> taylor_convergence(const TaylorConvergenceConfig& config) {
  config.validate();
  const std::size_t d = 2;
  const PiecewiseLinearPath x = taylor_spiral_path(derived_seed(config.seed, 0), config.path_points, config.L);
  const PiecewiseLinearPath xbar = time_augment(x, PathConfig{config.L});
  const std::size_t per_run = config.max_depth;
  const std::size_t total = config.runs * config.activations.size();
  std::vector<TaylorRow> rows(total * per_run);

  parallel_for(total, config.workers, [&](std::size_t job) {
    const std::size_t a = job / config.runs;
    const std::size_t run = job % config.runs;
    const Activation act = config.activations[a];
    auto rng = derived_rng(config.seed, 1 + a, run);
    RnnParams p = zero_params(config.hidden, d, 1, act);
    fill_uniform(p.U.data(), 1.0, rng);
    fill_uniform(p.V.data(), 1.0, rng);
    fill_uniform(p.b, 1.0 / std::sqrt(static_cast<double>(config.hidden)), rng);
    fill_uniform(p.psi.data(), 1.0, rng);
    // Rescale W = [U V] to a log-uniform Frobenius norm.
    const double target =
        std::exp(std::uniform_real_distribution<double>(std::log(config.frob_min), std::log(config.frob_max))(rng));
    const double scale = target / frobenius_norm(p.W());
    for (double& v : p.U.data()) v *= scale;
    for (double& v : p.V.data()) v *= scale;
    const double wf = frobenius_norm(p.W());

    const Vector ref = integrate_cde(p, xbar, config.L, config.reference).final_value();
    const CdeField field(p, config.L);
    const StarTable table = all_word_stars(field, cde_initial_state(p, xbar), config.max_depth);
    const std::size_t run_id = job;
    for (std::size_t N = 1; N <= config.max_depth; ++N) {
      StarTable truncated{table.control_dim, {table.levels.begin(), table.levels.begin() + static_cast<std::ptrdiff_t>(N + 1)}};
      const Vector hn = taylor_expansion(truncated, xbar, 1.0);
      double sq = 0.0;
      for (std::size_t i = 0; i < config.hidden; ++i) sq += (hn[i] - ref[i]) * (hn[i] - ref[i]);
      const LambdaBound bound = taylor_error_bound(p, config.L, N);
      rows[job * per_run + (N - 1)] = {run_id, wf, act.name(), N, std::sqrt(sq), bound.applicable, bound.value};
    }
  });
  return rows;
}

void write_taylor_csv(const std::filesystem::path& file, std::span<const TaylorRow> rows) {
  auto out = open_csv(file);
  out << "run_id,frob_norm,activation,N,error\n";
  for (const TaylorRow& r : rows)
    out << r.run_id << ',' << r.frob_norm << ',' << r.activation << ',' << r.N << ',' << r.error << '\n';
}

double log_error_slope(std::span<const TaylorRow> run_rows) {
  require(run_rows.size() >= 2, "log_error_slope: need at least two depths");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(run_rows.size());
  for (const TaylorRow& r : run_rows) {
    const double xv = static_cast<double>(r.N);
    const double yv = std::log10(std::max(r.error, 1e-300));
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    sxy += xv * yv;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

TaylorSummary summarize_taylor(std::span<const TaylorRow> rows, std::size_t bound_max_depth) {
  TaylorSummary out;
  out.bound_max_depth = bound_max_depth;
  std::size_t max_n = 0;
  for (const TaylorRow& r : rows) {
    max_n = std::max(max_n, r.N);
    if (std::find(out.activations.begin(), out.activations.end(), r.activation) == out.activations.end())
      out.activations.push_back(r.activation);
  }
  for (const std::string& act : out.activations) {
    std::vector<double> medians;
    for (std::size_t N = 1; N <= max_n; ++N) {
      std::vector<double> logs;
      for (const TaylorRow& r : rows)
        if (r.activation == act && r.N == N) logs.push_back(std::log10(std::max(r.error, 1e-300)));
      std::sort(logs.begin(), logs.end());
      const std::size_t m = logs.size();
      medians.push_back(m == 0 ? 0.0 : (m % 2 ? logs[m / 2] : 0.5 * (logs[m / 2 - 1] + logs[m / 2])));
    }
    out.median_log_error.push_back(std::move(medians));
  }
  // Rows of one run are contiguous.
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].run_id == rows[i].run_id) ++j;
    const auto run = rows.subspan(i, j - i);
    // The radius condition depends on the weights only, so the first row decides.
    if (run.front().within_radius) {
      ++out.radius_runs;
      if (run.size() >= 2 && log_error_slope(run) < 0.0) ++out.radius_negative_slope;
      for (const TaylorRow& r : run) {
        if (r.N > bound_max_depth) continue;
        ++out.bound_checks;
        if (!(r.error <= r.bound)) ++out.bound_violations;
      }
    }
    i = j;
  }
  return out;
}

// --- Euler gap ----------------------------------------------------------------

void EulerGapConfig::validate() const {
  PathConfig{L}.validate();
  require(runs >= 1 && hidden >= 1, "euler-gap: runs and hidden must be positive");
  require(!T.empty(), "euler-gap: empty T list");
  for (std::size_t t : T) require(t >= 1, "euler-gap: T values must be positive");
  require(path_points >= 1, "euler-gap: path points must be positive");
  require(weight_scale >= 0.0 && std::isfinite(weight_scale), "euler-gap: weight scale must be non-negative");
  reference.validate();
}

std::vector<EulerRow> euler_gap_experiment(const EulerGapConfig& config) {
  config.validate();
  std::vector<EulerRow> rows(config.runs * config.T.size());
  parallel_for(config.runs, config.workers, [&](std::size_t run) {
    auto rng = derived_rng(config.seed, 100, run);
    RnnParams p = zero_params(config.hidden, 2, 1, config.activation);
    fill_uniform(p.U.data(), config.weight_scale, rng);
    fill_uniform(p.V.data(), config.weight_scale, rng);
    fill_uniform(p.b, config.weight_scale, rng);
    fill_uniform(p.h0, config.weight_scale, rng);
    fill_uniform(p.psi.data(), 1.0, rng);
    // One spiral per run, finely sampled, as the continuous input.
    const SpiralDataset one = make_spirals(1, config.path_points, derived_seed(config.seed, 101, run));
    const auto& samples = one.sequences.front();
    const PiecewiseLinearPath x = normalize(from_samples(samples), PathConfig{config.L}).path;
    for (std::size_t k = 0; k < config.T.size(); ++k) {
      const EulerGap g = euler_gap(p, x, config.T[k], config.L, config.reference);
      rows[run * config.T.size() + k] = {run, config.T[k], g.gap, g.bound};
    }
  });
  return rows;
}

void write_euler_csv(const std::filesystem::path& file, std::span<const EulerRow> rows) {
  auto out = open_csv(file);
  out << "run_id,T,gap,bound\n";
  for (const EulerRow& r : rows) out << r.run_id << ',' << r.T << ',' << r.gap << ',' << r.bound << '\n';
}

EulerSummary summarize_euler(std::span<const EulerRow> rows) {
  EulerSummary out;
  out.rows = rows.size();
  std::vector<std::size_t> ts;
  for (const EulerRow& r : rows) {
    if (r.gap <= r.bound) ++out.within_bound;
    if (std::find(ts.begin(), ts.end(), r.T) == ts.end()) ts.push_back(r.T);
  }
  std::sort(ts.begin(), ts.end());
  if (ts.size() < 2) return out;
  const std::size_t t_prev = ts[ts.size() - 2], t_last = ts.back();
  std::size_t max_run = 0;
  for (const EulerRow& r : rows) max_run = std::max(max_run, r.run_id);
  for (std::size_t run = 0; run <= max_run; ++run) {
    double a = -1.0, b = -1.0;
    for (const EulerRow& r : rows) {
      if (r.run_id != run) continue;
      if (r.T == t_prev) a = r.gap;
      if (r.T == t_last) b = r.gap;
    }
    if (a < 0.0 || b < 0.0) continue;
    const double ratio = b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
    out.last_ratios.push_back(ratio);
    if (ratio >= 1.5 && ratio <= 2.5) ++out.ratios_in_band;
  }
  return out;
}

// --- Training and adversarial accuracy --------------------------------------

void TrainAttackConfig::validate() const {
  require(seeds >= 1 && hidden >= 1 && n_train >= 1 && n_test >= 1 && T >= 1,
          "train-attack: counts must be positive");
  require(lambda >= 0.0 && std::isfinite(lambda), "train-attack: lambda must be non-negative");
  require(!eps_grid.empty(), "train-attack: empty eps grid");
  for (double e : eps_grid) require(e >= 0.0 && std::isfinite(e), "train-attack: eps values must be non-negative");
  require(attack_steps >= 1, "train-attack: attack steps must be positive");
  train.validate();
}

TrainAttackResult train_attack(const TrainAttackConfig& config) {
  config.validate();
  const std::array<double, 2> lambdas{0.0, config.lambda};
  const std::size_t jobs = config.seeds * lambdas.size();
  TrainAttackResult out;
  out.runs.resize(jobs, TrainAttackRun{0, 0.0, TrainResult{zero_params(1, 1, 1, config.activation), {}}});
  std::vector<std::vector<AttackRow>> attacks(jobs);

  parallel_for(jobs, config.workers, [&](std::size_t job) {
    const std::size_t s = job / lambdas.size();
    const double lambda = lambdas[job % lambdas.size()];
    const double L = config.train.L;
    auto prepare = [&](SpiralDataset d) { return config.normalize_inputs ? normalize_dataset(d, L) : d; };
    const SpiralDataset train_set = prepare(make_spirals(config.n_train, config.T, derived_seed(config.seed, 200, s)));
    const SpiralDataset test_set = prepare(make_spirals(config.n_test, config.T, derived_seed(config.seed, 300, s)));
    auto rng = derived_rng(config.seed, 400, s);
    const RnnParams init = init_params(config.hidden, 2, 1, config.activation, rng);
    TrainConfig tc = config.train;
    tc.lambda = lambda;
    TrainResult r = train(tc, train_set, init, tc.penalty_depth);
    for (double eps : config.eps_grid) {
      const AttackResult a = pgd_attack(r.params, test_set, AttackConfig{eps, config.attack_steps, 0.0});
      attacks[job].push_back({s, lambda, eps, a.clean_accuracy, a.adversarial_accuracy});
    }
    out.runs[job] = TrainAttackRun{s, lambda, std::move(r)};
  });
  for (auto& a : attacks) out.attacks.insert(out.attacks.end(), a.begin(), a.end());
  return out;
}

void write_attack_csv(const std::filesystem::path& file, std::span<const AttackRow> rows) {
  auto out = open_csv(file);
  out << "seed,lambda,eps,clean_accuracy,adv_accuracy\n";
  for (const AttackRow& r : rows)
    out << r.seed_index << ',' << r.lambda << ',' << r.eps << ',' << r.clean_accuracy << ',' << r.adv_accuracy << '\n';
}

double mean_adv_accuracy(std::span<const AttackRow> rows, double lambda, double eps) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const AttackRow& r : rows) {
    if (r.lambda == lambda && r.eps == eps) {
      sum += r.adv_accuracy;
      ++n;
    }
  }
  require(n > 0, "mean_adv_accuracy: no rows for the requested arm and eps");
  return sum / static_cast<double>(n);
}

}  // namespace rnnsig
