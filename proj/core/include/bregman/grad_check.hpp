#pragma once

#include <functional>
#include <span>
#include <string>

#include "bregman/linalg.hpp"

namespace bregman {

/// Central finite differences (f(x+h e_k) - f(x-h e_k)) / 2h per coordinate.
/// The step for coordinate k is h * max(1, |x_k|).
/// Throws NumericError if f returns a non-finite value.
Vector finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x, double h = 1e-5);

/// Relative error with absolute floor: |a-b| / max(|a|, |b|) unless both are
/// below the floor, in which case 0.
double rel_error(double analytic, double numeric, double abs_floor = 1e-8);

/// Worst elementwise rel_error between an analytic gradient and the central
/// finite difference of f at x.
double worst_grad_error(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x, std::span<const double> analytic,
                        double h = 1e-5, double abs_floor = 1e-8);

}  // namespace bregman
