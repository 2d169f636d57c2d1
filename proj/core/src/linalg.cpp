#include "bregman/linalg.hpp"

#include <cmath>

namespace bregman {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: length mismatch (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

Vector l2_normalize(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DegenerateInputError("l2_normalize: vector norm is " + std::to_string(n));
  }
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

void check_finite(std::span<const double> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(what + ": non-finite value at index " + std::to_string(i));
    }
  }
}

bool all_finite(std::span<const double> values) {
  for (double x : values) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace bregman
