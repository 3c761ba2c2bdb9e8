#pragma once

// Generalization-bound calculators. Inputs are constants describing a
// parameter class, supplied by the caller; nothing is estimated from data.

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rnnsig {

struct BinaryBoundInput {
  double K_W = 0.0;    // bound on ||W||_F
  double K_b = 0.0;    // bound on ||b|| (recorded, not used by the formula)
  double K_psi = 1.0;  // bound on ||psi||_op
  double L = 0.5;
  double d = 1.0;      // input dimension
  double n = 1.0;      // sample size
  double delta = 0.05;
  double T = 1.0;
  double K_loss = 1.0;  // Lipschitz constant of the loss
  double empirical_risk = 0.0;
  // Bound on sup ||f||; 1 for the logistic cell.
  double f_inf = 1.0;
  // When set, used as B instead of the logistic closed form.
  std::optional<double> B;
};

struct SequentialBoundInput {
  double p = 1.0;    // output dimension
  double K_y = 0.0;  // bound on ||y_j||
  double B = 0.0;    // bound on each ||xi_l||_H
  double L = 0.5;
  double n = 1.0;
  double delta = 0.05;
  double T = 1.0;
  // sup over the class of (c1 + ||psi||_op ||f||_inf).
  double sup_c1_psi_f = 0.0;
  double empirical_risk = 0.0;
};

// Ordered named values: inputs, derived constants, then the additive terms
// of the right-hand side and their sum.
struct BoundReport {
  std::string kind;
  std::vector<std::pair<std::string, double>> values;

  double get(const std::string& key) const;
  std::string to_key_value() const;
  std::string to_json() const;
};

// B = sqrt(2) K_psi (1 - L) / (1 - L - 32 d K_W) unless B is given;
// c2 = K_loss K_psi K_W e^{K_W} (L + f_inf e^{K_W}).
BoundReport bound_binary(const BinaryBoundInput& in);

// c3 = sup(c1 + ||psi|| ||f||) + 2 sqrt(p) B / (1 - L) + 2 K_y
// c4 = B / (1 - L) + K_y
// c5 = 4 p B c4 / (1 - L) + K_y^2
BoundReport bound_sequential(const SequentialBoundInput& in);

}  // namespace rnnsig
