// rnnsig: experiment and verification front end.
//
//   rnnsig taylor-convergence --runs 100 --out results/
//   rnnsig euler-gap --T 16,32,64,128
//   rnnsig train-attack --seeds 5 --lambda 0.1
//   rnnsig verify
//   rnnsig sig-check --input path.csv --depth 4
//   rnnsig bounds binary --K-W 0.002 --n 1000
//
// Exit codes: 0 success, 1 invalid input or failed verification, 2 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rnnsig/bounds.hpp"
#include "rnnsig/checkpoint.hpp"
#include "rnnsig/error.hpp"
#include "rnnsig/experiments.hpp"
#include "rnnsig/path.hpp"
#include "rnnsig/signature.hpp"
#include "rnnsig/verify.hpp"

namespace fs = std::filesystem;
using namespace rnnsig;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::size_t workers = 0;

  fs::path dir() const {
    std::error_code ec;
    fs::create_directories(out, ec);
    require(!ec, "cannot create output directory " + out);
    return out;
  }
};

std::string fmt_double(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

std::vector<Activation> parse_activations(const std::vector<std::string>& names) {
  std::vector<Activation> out;
  for (const auto& n : names) out.push_back(Activation::parse(n));
  return out;
}

int run_taylor(const Common& c, TaylorConvergenceConfig cfg, const std::vector<std::string>& acts) {
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  cfg.activations = parse_activations(acts);
  const auto rows = taylor_convergence(cfg);
  const fs::path file = c.dir() / "taylor_convergence.csv";
  write_taylor_csv(file, rows);
  const TaylorSummary s = summarize_taylor(rows);
  for (std::size_t a = 0; a < s.activations.size(); ++a) {
    std::cout << s.activations[a] << " median log10 error by N:";
    for (double m : s.median_log_error[a]) std::cout << ' ' << fmt_double(m);
    std::cout << '\n';
  }
  std::cout << "runs inside radius: " << s.radius_runs << ", negative slope: " << s.radius_negative_slope << '\n'
            << "bound checks: " << s.bound_checks << ", violations: " << s.bound_violations << '\n'
            << "wrote " << file.string() << '\n';
  return 0;
}

int run_euler(const Common& c, EulerGapConfig cfg, const std::string& act) {
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  cfg.activation = Activation::parse(act);
  const auto rows = euler_gap_experiment(cfg);
  const fs::path file = c.dir() / "euler_gap.csv";
  write_euler_csv(file, rows);
  const EulerSummary s = summarize_euler(rows);
  std::cout << "gap <= c1/T in " << s.within_bound << '/' << s.rows << " rows\n"
            << "last doubling ratio in [1.5, 2.5] for " << s.ratios_in_band << '/' << s.last_ratios.size() << " runs\n"
            << "wrote " << file.string() << '\n';
  return 0;
}

int run_train_attack(const Common& c, TrainAttackConfig cfg, const std::string& act, bool save_models) {
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  cfg.activation = Activation::parse(act);
  const TrainAttackResult result = train_attack(cfg);
  const fs::path dir = c.dir();
  write_attack_csv(dir / "attack.csv", result.attacks);
  for (const TrainAttackRun& run : result.runs) {
    const std::string stem = "seed" + std::to_string(run.seed_index) + "_lambda" + fmt_double(run.lambda);
    write_trace_csv(dir / ("trace_" + stem + ".csv"), run.result.trace);
    if (save_models) save_params(dir / ("model_" + stem + ".txt"), run.result.params);
  }
  std::cout << "eps   mean_adv_acc(lambda=0)   mean_adv_acc(lambda=" << cfg.lambda << ")\n";
  for (double eps : cfg.eps_grid)
    std::cout << fmt_double(eps) << "   " << fmt_double(mean_adv_accuracy(result.attacks, 0.0, eps)) << "   "
              << fmt_double(mean_adv_accuracy(result.attacks, cfg.lambda, eps)) << '\n';
  std::cout << "wrote " << (dir / "attack.csv").string() << " and per-run traces\n";
  return 0;
}

int run_verify(const Common& c, VerifyConfig cfg) {
  cfg.seed = c.seed;
  const VerifyReport report = run_verification(cfg);
  std::cout << report.to_text();
  return report.all_passed() ? 0 : 1;
}

int run_sig_check(const std::string& input, std::size_t depth, double L, bool augment, bool normalize_first,
                  const std::string& convention) {
  require(!input.empty(), "sig-check: --input is required");
  PiecewiseLinearPath x = from_samples(read_samples_csv(input));
  const PathConfig pc{L};
  if (normalize_first) x = normalize(x, pc).path;
  if (augment) x = time_augment(x, pc);
  SigConvention conv = SigConvention::Factorial;
  if (convention == "standard")
    conv = SigConvention::Standard;
  else
    require(convention == "factorial", "sig-check: convention must be factorial or standard");
  const Signature sig = signature(x, depth, 0.0, 1.0, conv);

  nlohmann::json j;
  j["dim"] = sig.dim();
  j["depth"] = sig.depth();
  j["convention"] = convention;
  j["total_variation"] = total_variation(x);
  j["norm"] = sig_norm(convert(sig, SigConvention::Factorial));
  auto levels = nlohmann::json::array();
  for (std::size_t k = 0; k <= depth; ++k) {
    const auto data = sig.seq.level(k).data();
    levels.push_back(std::vector<double>(data.begin(), data.end()));
  }
  j["levels"] = levels;
  // Chen consistency at the midpoint, in the requested convention.
  const Signature joined = chen(signature(x, depth, 0.0, 0.5, conv), signature(x, depth, 0.5, 1.0, conv));
  double chen_err = 0.0;
  for (std::size_t k = 0; k <= depth; ++k) {
    const auto a = joined.seq.level(k).data(), b = sig.seq.level(k).data();
    for (std::size_t i = 0; i < a.size(); ++i) chen_err = std::max(chen_err, std::abs(a[i] - b[i]));
  }
  j["chen_midpoint_error"] = chen_err;
  if (augment && normalize_first) j["norm_bound"] = 2.0 / (1.0 - L);
  std::cout << j.dump(2) << '\n';
  return 0;
}

void print_report(const BoundReport& r, const std::string& format) {
  require(format == "json" || format == "kv", "bounds: format must be json or kv");
  std::cout << (format == "json" ? r.to_json() : r.to_key_value()) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signature-space analysis of recurrent networks: experiments and checks"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file");
  Common common;
  app.add_option("--seed", common.seed, "Base random seed")->capture_default_str();
  app.add_option("--out", common.out, "Output directory")->capture_default_str();
  app.add_option("--workers", common.workers, "Worker threads (0 = all cores)")->capture_default_str();

  // taylor-convergence
  TaylorConvergenceConfig tc;
  std::vector<std::string> taylor_acts{"logistic", "tanh"};
  auto* taylor = app.add_subcommand("taylor-convergence", "Step-N Taylor error against the reference ODE");
  taylor->add_option("--runs", tc.runs, "Random initializations per activation")->capture_default_str();
  taylor->add_option("--hidden", tc.hidden, "Hidden units")->capture_default_str();
  taylor->add_option("--max-depth", tc.max_depth, "Largest N")->capture_default_str();
  taylor->add_option("--points", tc.path_points, "Samples on the spiral path")->capture_default_str();
  taylor->add_option("--L", tc.L, "Lipschitz constant of the input space")->capture_default_str();
  taylor->add_option("--frob-min", tc.frob_min, "Smallest ||W||_F")->capture_default_str();
  taylor->add_option("--frob-max", tc.frob_max, "Largest ||W||_F")->capture_default_str();
  taylor->add_option("--activations", taylor_acts, "Activations")->delimiter(',')->capture_default_str();
  taylor->add_option("--atol", tc.reference.atol, "Reference solver absolute tolerance")->capture_default_str();
  taylor->add_option("--rtol", tc.reference.rtol, "Reference solver relative tolerance")->capture_default_str();
  taylor->add_option("--max-steps", tc.reference.max_steps, "Reference solver step budget")->capture_default_str();

  // euler-gap
  EulerGapConfig ec;
  std::string euler_act = "logistic";
  auto* euler = app.add_subcommand("euler-gap", "Distance between the discrete RNN and its ODE limit");
  euler->add_option("--runs", ec.runs, "Random networks")->capture_default_str();
  euler->add_option("--hidden", ec.hidden, "Hidden units")->capture_default_str();
  euler->add_option("--T", ec.T, "Sequence lengths")->delimiter(',')->capture_default_str();
  euler->add_option("--points", ec.path_points, "Samples on each spiral path")->capture_default_str();
  euler->add_option("--L", ec.L, "Lipschitz constant of the input space")->capture_default_str();
  euler->add_option("--scale", ec.weight_scale, "Weights uniform on [-scale, scale]")->capture_default_str();
  euler->add_option("--activation", euler_act, "Activation")->capture_default_str();
  euler->add_option("--atol", ec.reference.atol, "Reference solver absolute tolerance")->capture_default_str();
  euler->add_option("--rtol", ec.reference.rtol, "Reference solver relative tolerance")->capture_default_str();
  euler->add_option("--max-steps", ec.reference.max_steps, "Reference solver step budget")->capture_default_str();

  // train-attack
  TrainAttackConfig ac;
  std::string attack_act = "tanh";
  bool save_models = false;
  auto* attack = app.add_subcommand("train-attack", "Train with and without the RKHS penalty, then attack");
  attack->add_option("--seeds", ac.seeds, "Seed pairs")->capture_default_str();
  attack->add_option("--hidden", ac.hidden, "Hidden units")->capture_default_str();
  attack->add_option("--n-train", ac.n_train, "Training spirals")->capture_default_str();
  attack->add_option("--n-test", ac.n_test, "Test spirals")->capture_default_str();
  attack->add_option("--T", ac.T, "Points per spiral")->capture_default_str();
  attack->add_option("--lambda", ac.lambda, "Penalty weight of the second arm")->capture_default_str();
  attack->add_option("--activation", attack_act, "Activation")->capture_default_str();
  attack->add_option("--epochs", ac.train.epochs, "Epochs")->capture_default_str();
  attack->add_option("--lr", ac.train.lr, "Adam learning rate")->capture_default_str();
  attack->add_option("--depth", ac.train.penalty_depth, "Truncation depth of the penalty")->capture_default_str();
  attack->add_option("--L", ac.train.L, "Lipschitz constant of the input space")->capture_default_str();
  attack->add_option("--eps", ac.eps_grid, "Attack radii")->delimiter(',')->capture_default_str();
  attack->add_option("--attack-steps", ac.attack_steps, "PGD iterations")->capture_default_str();
  attack->add_flag("--save-models", save_models, "Write trained parameters");
  attack->add_flag("--normalize-inputs", ac.normalize_inputs, "Rescale spirals to total variation L");

  // verify
  VerifyConfig vc;
  auto* verify = app.add_subcommand("verify", "Run the in-process property checks");
  verify->add_option("--trials", vc.trials, "Random draws per check")->capture_default_str();
  verify->add_option("--sig-tol", vc.sig_tol, "Tolerance for exact identities")->capture_default_str();
  verify->add_option("--ode-tol", vc.ode_tol, "Tolerance for solver agreement")->capture_default_str();
  verify->add_option("--grad-tol", vc.grad_tol, "Relative tolerance for gradients")->capture_default_str();

  // sig-check
  std::string sig_input, sig_conv = "factorial";
  std::size_t sig_depth = 4;
  double sig_L = 0.5;
  bool sig_augment = false, sig_normalize = false;
  auto* sigcheck = app.add_subcommand("sig-check", "Signature of a sampled path read from CSV");
  sigcheck->add_option("--input", sig_input, "CSV, one sample x_j per row, optional header")->required();
  sigcheck->add_option("--depth", sig_depth, "Truncation depth")->capture_default_str();
  sigcheck->add_option("--L", sig_L, "Lipschitz constant used by --normalize and --augment")->capture_default_str();
  sigcheck->add_flag("--normalize", sig_normalize, "Translate and rescale into the input space first");
  sigcheck->add_flag("--augment", sig_augment, "Append the time channel");
  sigcheck->add_option("--convention", sig_conv, "factorial or standard")->capture_default_str();

  // bounds
  std::string format = "kv";
  auto* bounds = app.add_subcommand("bounds", "Generalization bound calculators");
  bounds->require_subcommand(1);
  bounds->fallthrough();
  bounds->add_option("--format", format, "json or kv")->capture_default_str();
  BinaryBoundInput bin;
  double bin_B = -1.0;
  auto* binary = bounds->add_subcommand("binary", "Binary classification bound");
  binary->add_option("--K-W", bin.K_W, "Bound on ||W||_F")->capture_default_str();
  binary->add_option("--K-b", bin.K_b, "Bound on ||b||")->capture_default_str();
  binary->add_option("--K-psi", bin.K_psi, "Bound on ||psi||_op")->capture_default_str();
  binary->add_option("--L", bin.L, "Lipschitz constant of the input space")->capture_default_str();
  binary->add_option("--d", bin.d, "Input dimension")->capture_default_str();
  binary->add_option("--n", bin.n, "Sample size")->capture_default_str();
  binary->add_option("--delta", bin.delta, "Confidence level")->capture_default_str();
  binary->add_option("--T", bin.T, "Sequence length")->capture_default_str();
  binary->add_option("--K-loss", bin.K_loss, "Lipschitz constant of the loss")->capture_default_str();
  binary->add_option("--risk", bin.empirical_risk, "Empirical risk")->capture_default_str();
  binary->add_option("--f-inf", bin.f_inf, "Bound on sup ||f||")->capture_default_str();
  binary->add_option("--B", bin_B, "Override the RKHS radius B (negative = closed form)");
  SequentialBoundInput seq;
  auto* sequential = bounds->add_subcommand("sequential", "Sequence-to-sequence bound");
  sequential->add_option("--p", seq.p, "Output dimension")->capture_default_str();
  sequential->add_option("--K-y", seq.K_y, "Bound on ||y_j||")->capture_default_str();
  sequential->add_option("--B", seq.B, "Bound on each ||xi_l||")->capture_default_str();
  sequential->add_option("--L", seq.L, "Lipschitz constant of the input space")->capture_default_str();
  sequential->add_option("--n", seq.n, "Sample size")->capture_default_str();
  sequential->add_option("--delta", seq.delta, "Confidence level")->capture_default_str();
  sequential->add_option("--T", seq.T, "Sequence length")->capture_default_str();
  sequential->add_option("--sup-c", seq.sup_c1_psi_f, "sup of c1 + ||psi|| ||f||_inf")->capture_default_str();
  sequential->add_option("--risk", seq.empirical_risk, "Empirical risk")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*taylor) return run_taylor(common, tc, taylor_acts);
    if (*euler) return run_euler(common, ec, euler_act);
    if (*attack) return run_train_attack(common, ac, attack_act, save_models);
    if (*verify) return run_verify(common, vc);
    if (*sigcheck) return run_sig_check(sig_input, sig_depth, sig_L, sig_augment, sig_normalize, sig_conv);
    if (*binary) {
      if (bin_B >= 0.0) bin.B = bin_B;
      print_report(bound_binary(bin), format);
      return 0;
    }
    if (*sequential) {
      print_report(bound_sequential(seq), format);
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
