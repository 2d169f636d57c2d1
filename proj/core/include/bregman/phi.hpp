#pragma once

#include <span>

#include "bregman/linalg.hpp"
#include "bregman/rng.hpp"

namespace bregman {

/// Convex generating function
///
///   phi(z) = sum_j softplus(beta_j . z + b_j) + eps_quad * ||z||^2
///
/// A bank of m Softplus-affine units plus a quadratic floor. Each unit is
/// convex (affine composed with the convex, increasing Softplus link); the
/// quadratic floor with eps_quad > 0 makes phi strictly convex in every
/// direction even when the beta_j rows do not span the space.
struct GnmPhi {
  Matrix beta;      // m x d, unit directions
  Vector bias;      // m
  double eps_quad = 0.0;
  bool eps_trainable = false;

  GnmPhi() = default;
  GnmPhi(Matrix beta_in, Vector bias_in, double eps);

  std::size_t units() const { return beta.rows(); }
  std::size_t dim() const { return beta.cols(); }

  /// beta_j ~ N(0, 1/sqrt(d)) i.i.d., b_j = 0: pre-activations start near 0
  /// where the Softplus curvature is largest.
  static GnmPhi random_init(std::size_t m, std::size_t d, double eps_quad, RngStream& rng);

  void validate() const;
};

/// Gradient blocks of bregman_div with respect to both inputs and all phi
/// parameters.
struct DivGrads {
  Vector d_x;
  Vector d_y;
  Matrix d_beta;
  Vector d_bias;
  double d_eps = 0.0;
};

double phi_value(const GnmPhi& phi, std::span<const double> z);

/// grad phi(z) = sum_j sigmoid(a_j) beta_j + 2 eps z, a_j = beta_j.z + b_j.
Vector phi_grad(const GnmPhi& phi, std::span<const double> z);

/// Hessian-vector product H_phi(z) v.
Vector phi_hvp(const GnmPhi& phi, std::span<const double> z, std::span<const double> v);

/// d_phi(x, y) = phi(x) - phi(y) - (x-y).grad phi(y).
/// Tiny negatives above -1e-9 (float noise) clamp to 0; anything below that
/// threshold throws ConvexityError.
double bregman_div(const GnmPhi& phi, std::span<const double> x, std::span<const double> y);

/// Value plus all gradient blocks in one pass.
double bregman_div_with_grads(const GnmPhi& phi, std::span<const double> x,
                              std::span<const double> y, DivGrads& out);

DivGrads bregman_div_grads(const GnmPhi& phi, std::span<const double> x,
                           std::span<const double> y);

/// Per-point cache for batched divergence work: activations, sigmoids,
/// phi value and gradient for one point. With caches for x and y,
/// d_phi(x, y) costs O(d) and every gradient block O(m d).
struct PhiPointCache {
  Vector act;   // a_j = beta_j.z + b_j
  Vector sig;   // sigmoid(a_j)
  double value = 0.0;
  Vector grad;  // grad phi(z)
};

PhiPointCache phi_point_cache(const GnmPhi& phi, std::span<const double> z);

/// d_phi(x, y) from cached evaluations (no clamp, raw value).
double bregman_div_cached(const PhiPointCache& cx, const PhiPointCache& cy,
                          std::span<const double> x, std::span<const double> y);

}  // namespace bregman
