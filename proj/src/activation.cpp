#include "rnnsig/activation.hpp"

#include <array>
#include <cmath>

#include "rnnsig/error.hpp"

namespace rnnsig {

namespace {

constexpr std::size_t kMaxOrder = Activation::max_derivative_order();

// Coefficients c[n][k] with sigma^(n) = sum_k c[n][k] sigma^k, from
// c[n][k] = (-1)^(k-1) (k-1)! S2(n+1, k).
struct LogisticPoly {
  std::array<std::array<double, kMaxOrder + 2>, kMaxOrder + 1> c{};

  LogisticPoly() {
    std::array<std::array<double, kMaxOrder + 3>, kMaxOrder + 3> s2{};
    s2[0][0] = 1.0;
    for (std::size_t n = 1; n <= kMaxOrder + 1; ++n)
      for (std::size_t k = 1; k <= n; ++k) s2[n][k] = static_cast<double>(k) * s2[n - 1][k] + s2[n - 1][k - 1];
    for (std::size_t n = 0; n <= kMaxOrder; ++n) {
      double fact = 1.0;
      for (std::size_t k = 1; k <= n + 1; ++k) {
        if (k > 1) fact *= static_cast<double>(k - 1);
        c[n][k] = ((k % 2 == 1) ? 1.0 : -1.0) * fact * s2[n + 1][k];
      }
    }
  }
};

const LogisticPoly& logistic_poly() {
  static const LogisticPoly poly;
  return poly;
}

double logistic_derivative(double x, std::size_t n) {
  const double s = logistic(x);
  if (n == 0) return s;
  if (n == 1) return s * (1.0 - s);
  // Horner in sigma.
  const auto& c = logistic_poly().c[n];
  double acc = 0.0;
  for (std::size_t k = n + 1; k >= 1; --k) acc = acc * s + c[k];
  return acc * s;
}

}  // namespace

double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Activation Activation::parse(std::string_view name) {
  if (name == "identity" || name == "linear") return Activation(ActivationKind::Identity);
  if (name == "logistic" || name == "sigmoid") return Activation(ActivationKind::Logistic);
  if (name == "tanh") return Activation(ActivationKind::Tanh);
  throw ValidationError("unknown activation '" + std::string(name) + "'");
}

std::string Activation::name() const {
  switch (kind_) {
    case ActivationKind::Identity: return "identity";
    case ActivationKind::Logistic: return "logistic";
    case ActivationKind::Tanh: return "tanh";
  }
  return "?";
}

double Activation::value(double x) const noexcept {
  switch (kind_) {
    case ActivationKind::Identity: return x;
    case ActivationKind::Logistic: return logistic(x);
    case ActivationKind::Tanh: return std::tanh(x);
  }
  return x;
}

double Activation::derivative(double x, std::size_t n) const {
  require(n <= kMaxOrder, "activation derivative order exceeds " + std::to_string(kMaxOrder));
  switch (kind_) {
    case ActivationKind::Identity:
      return n == 0 ? x : (n == 1 ? 1.0 : 0.0);
    case ActivationKind::Logistic:
      return logistic_derivative(x, n);
    case ActivationKind::Tanh: {
      if (n == 0) return std::tanh(x);
      if (n == 1) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      }
      // tanh(x) = 2 sigma(2x) - 1
      return std::ldexp(logistic_derivative(2.0 * x, n), static_cast<int>(n) + 1);
    }
  }
  return 0.0;
}

double Activation::lipschitz() const noexcept {
  return kind_ == ActivationKind::Logistic ? 0.25 : 1.0;
}

double Activation::growth_constant() const noexcept {
  switch (kind_) {
    case ActivationKind::Identity: return 0.0;
    case ActivationKind::Logistic: return 2.0;
    case ActivationKind::Tanh: return 4.0;
  }
  return 0.0;
}

}  // namespace rnnsig
