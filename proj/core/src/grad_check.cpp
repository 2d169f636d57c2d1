#include "bregman/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "bregman/errors.hpp"

namespace bregman {

Vector finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x, double h) {
  if (!(h > 0.0)) throw NumericError("finite_diff_grad: step h must be positive");
  Vector point(x.begin(), x.end());
  Vector grad(x.size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double step = h * std::max(1.0, std::abs(point[k]));
    const double saved = point[k];
    point[k] = saved + step;
    const double fp = f(point);
    point[k] = saved - step;
    const double fm = f(point);
    point[k] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("finite_diff_grad: f returned a non-finite value at coordinate " +
                         std::to_string(k));
    }
    grad[k] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

double rel_error(double analytic, double numeric, double abs_floor) {
  const double diff = std::abs(analytic - numeric);
  if (diff <= abs_floor) return 0.0;
  return diff / std::max(std::abs(analytic), std::abs(numeric));
}

double worst_grad_error(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x, std::span<const double> analytic, double h,
                        double abs_floor) {
  const Vector fd = finite_diff_grad(f, x, h);
  if (fd.size() != analytic.size()) {
    throw DimensionError("worst_grad_error: analytic gradient size mismatch");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < fd.size(); ++k) {
    worst = std::max(worst, rel_error(analytic[k], fd[k], abs_floor));
  }
  return worst;
}

}  // namespace bregman
