#pragma once

// Fast in-process property checks across all modules, run by `rnnsig verify`.

#include <cstdint>
#include <string>
#include <vector>

namespace rnnsig {

struct VerifyConfig {
  std::uint64_t seed = 0;
  std::size_t trials = 5;
  double sig_tol = 1e-10;   // exact identities on signatures and star products
  double ode_tol = 1e-6;    // solver agreement
  double grad_tol = 1e-3;   // relative error of gradients against finite differences

  void validate() const;
};

struct CheckResult {
  std::string module;
  std::string name;
  bool passed;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_passed() const noexcept;
  std::size_t failures() const noexcept;
  // One line per check: "PASS module/name  detail".
  std::string to_text() const;
};

VerifyReport run_verification(const VerifyConfig& config);

}  // namespace rnnsig
