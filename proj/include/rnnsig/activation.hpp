#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace rnnsig {

enum class ActivationKind { Identity, Logistic, Tanh };

// Scalar activation with derivatives of every order up to max_derivative_order().
class Activation {
 public:
  constexpr Activation() = default;
  constexpr explicit Activation(ActivationKind kind) : kind_(kind) {}

  static Activation parse(std::string_view name);

  ActivationKind kind() const noexcept { return kind_; }
  std::string name() const;

  double value(double x) const noexcept;
  // n-th derivative; n = 0 is the value.
  double derivative(double x, std::size_t n) const;

  // Global Lipschitz constant: 1, 1/4, 1.
  double lipschitz() const noexcept;
  // Constant a with sup|sigma^(n)| <= a^n n! style growth: 2 (logistic), 4 (tanh).
  // Identity has no such constant and returns 0.
  double growth_constant() const noexcept;
  bool bounded() const noexcept { return kind_ != ActivationKind::Identity; }

  static constexpr std::size_t max_derivative_order() { return 16; }

  bool operator==(const Activation&) const = default;

 private:
  ActivationKind kind_ = ActivationKind::Logistic;
};

// Logistic function 1 / (1 + exp(-x)), evaluated without overflow.
double logistic(double x) noexcept;

}  // namespace rnnsig
