#include "rnnsig/bounds.hpp"

#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "rnnsig/error.hpp"

namespace rnnsig {

namespace {

void require_nonneg(double v, const char* name) {
  require(std::isfinite(v) && v >= 0.0, std::string(name) + " must be finite and non-negative");
}

void check_common(double L, double n, double delta, double T) {
  require(std::isfinite(L) && L > 0.0 && L < 1.0, "L must lie in (0, 1)");
  require(std::isfinite(n) && n > 0.0, "n must be positive");
  require(std::isfinite(delta) && delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
  require(std::isfinite(T) && T > 0.0, "T must be positive");
}

}  // namespace

double BoundReport::get(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  throw ValidationError("BoundReport: no value named '" + key + "'");
}

std::string BoundReport::to_key_value() const {
  std::ostringstream out;
  out << std::setprecision(17) << "kind=" << kind << '\n';
  for (const auto& [k, v] : values) out << k << '=' << v << '\n';
  return out.str();
}

std::string BoundReport::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  for (const auto& [k, v] : values) j[k] = v;
  return j.dump(2);
}

BoundReport bound_binary(const BinaryBoundInput& in) {
  check_common(in.L, in.n, in.delta, in.T);
  require_nonneg(in.K_W, "K_W");
  require_nonneg(in.K_b, "K_b");
  require_nonneg(in.K_psi, "K_psi");
  require_nonneg(in.K_loss, "K_loss");
  require_nonneg(in.f_inf, "f_inf");
  require_nonneg(in.empirical_risk, "empirical_risk");
  require(std::isfinite(in.d) && in.d > 0.0, "d must be positive");

  double B;
  if (in.B) {
    require_nonneg(*in.B, "B");
    B = *in.B;
  } else {
    const double denom = 1.0 - in.L - 32.0 * in.d * in.K_W;
    require(denom > 0.0, "bound_binary: K_W must be below (1 - L) / (32 d) for the closed-form B");
    B = std::sqrt(2.0) * in.K_psi * (1.0 - in.L) / denom;
  }
  const double ekw = std::exp(in.K_W);
  const double c2 = in.K_loss * in.K_psi * in.K_W * ekw * (in.L + in.f_inf * ekw);
  const double t1 = in.empirical_risk;
  const double t2 = c2 / in.T;
  const double t3 = 8.0 * B * in.K_loss / ((1.0 - in.L) * std::sqrt(in.n));
  const double t4 = 2.0 * B * in.K_loss / (1.0 - in.L) * std::sqrt(std::log(1.0 / in.delta) / (2.0 * in.n));

  BoundReport r{"binary", {}};
  r.values = {{"K_W", in.K_W},     {"K_b", in.K_b},   {"K_psi", in.K_psi},  {"L", in.L},
              {"d", in.d},         {"n", in.n},       {"delta", in.delta},  {"T", in.T},
              {"K_loss", in.K_loss}, {"f_inf", in.f_inf}, {"B", B},        {"c2", c2},
              {"term_empirical", t1}, {"term_discretization", t2}, {"term_complexity", t3},
              {"term_confidence", t4}, {"total", t1 + t2 + t3 + t4}};
  return r;
}

BoundReport bound_sequential(const SequentialBoundInput& in) {
  check_common(in.L, in.n, in.delta, in.T);
  require(std::isfinite(in.p) && in.p >= 1.0, "p must be at least 1");
  require_nonneg(in.K_y, "K_y");
  require_nonneg(in.B, "B");
  require_nonneg(in.sup_c1_psi_f, "sup_c1_psi_f");
  require_nonneg(in.empirical_risk, "empirical_risk");

  const double inv = 1.0 / (1.0 - in.L);
  const double c3 = in.sup_c1_psi_f + 2.0 * std::sqrt(in.p) * in.B * inv + 2.0 * in.K_y;
  const double c4 = in.B * inv + in.K_y;
  const double c5 = 4.0 * in.p * in.B * inv * c4 + in.K_y * in.K_y;
  const double t1 = in.empirical_risk;
  const double t2 = c3 / in.T;
  const double t3 = 4.0 * in.p * c4 * in.B * inv / std::sqrt(in.n);
  const double t4 = std::sqrt(2.0 * c5 * std::log(1.0 / in.delta) / in.n);

  BoundReport r{"sequential", {}};
  r.values = {{"p", in.p},   {"K_y", in.K_y},     {"B", in.B},  {"L", in.L},
              {"n", in.n},   {"delta", in.delta}, {"T", in.T},  {"sup_c1_psi_f", in.sup_c1_psi_f},
              {"c3", c3},    {"c4", c4},          {"c5", c5},   {"term_empirical", t1},
              {"term_discretization", t2}, {"term_complexity", t3}, {"term_confidence", t4},
              {"total", t1 + t2 + t3 + t4}};
  return r;
}

}  // namespace rnnsig
