#pragma once

#include <cmath>

namespace bregman {

/// log(1 + exp(x)) in the overflow-safe branch form: for positive x this is
/// x + log1p(exp(-x)), so no exp() argument is ever positive.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// Logistic function, branch form keeps exp() arguments non-positive.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// d/dx sigmoid = sigmoid(x) * sigmoid(-x). Computing the second factor as
/// sigmoid(-x) instead of 1 - sigmoid(x) keeps it strictly positive over the
/// whole double range where exp is finite.
inline double sigmoid_prime(double x) { return sigmoid(x) * sigmoid(-x); }

}  // namespace bregman
