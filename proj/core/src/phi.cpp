#include "bregman/phi.hpp"

#include <cmath>
#include <string>

#include "bregman/softplus.hpp"

namespace bregman {

namespace {

constexpr double kNegativeClamp = -1e-9;

void require_dim(const GnmPhi& phi, std::span<const double> z, const char* op) {
  if (phi.units() > 0 && z.size() != phi.dim()) {
    throw DimensionError(std::string(op) + ": input dim " + std::to_string(z.size()) +
                         " does not match phi dim " + std::to_string(phi.dim()));
  }
}

}  // namespace

GnmPhi::GnmPhi(Matrix beta_in, Vector bias_in, double eps)
    : beta(std::move(beta_in)), bias(std::move(bias_in)), eps_quad(eps) {
  validate();
}

void GnmPhi::validate() const {
  if (beta.rows() != bias.size()) {
    throw DimensionError("GnmPhi: beta rows " + std::to_string(beta.rows()) +
                         " != bias length " + std::to_string(bias.size()));
  }
  if (eps_quad < 0.0 || !std::isfinite(eps_quad)) {
    throw NumericError("GnmPhi: eps_quad must be finite and >= 0");
  }
  if (units() == 0 && !(eps_quad > 0.0)) {
    throw NumericError("GnmPhi: m = 0 requires eps_quad > 0 for strict convexity");
  }
  check_finite(beta.storage(), "GnmPhi beta");
  check_finite(bias, "GnmPhi bias");
}

GnmPhi GnmPhi::random_init(std::size_t m, std::size_t d, double eps_quad, RngStream& rng) {
  Matrix beta(m, d);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < d; ++c) beta(j, c) = rng.normal(0.0, stddev);
  }
  return GnmPhi(std::move(beta), Vector(m, 0.0), eps_quad);
}

double phi_value(const GnmPhi& phi, std::span<const double> z) {
  require_dim(phi, z, "phi_value");
  double acc = 0.0;
  for (std::size_t j = 0; j < phi.units(); ++j) {
    acc += softplus(dot(phi.beta.row(j), z) + phi.bias[j]);
  }
  return acc + phi.eps_quad * squared_norm(z);
}

Vector phi_grad(const GnmPhi& phi, std::span<const double> z) {
  require_dim(phi, z, "phi_grad");
  Vector grad(z.size(), 0.0);
  for (std::size_t j = 0; j < phi.units(); ++j) {
    const double s = sigmoid(dot(phi.beta.row(j), z) + phi.bias[j]);
    const auto row = phi.beta.row(j);
    for (std::size_t c = 0; c < z.size(); ++c) grad[c] += s * row[c];
  }
  const double two_eps = 2.0 * phi.eps_quad;
  for (std::size_t c = 0; c < z.size(); ++c) grad[c] += two_eps * z[c];
  return grad;
}

Vector phi_hvp(const GnmPhi& phi, std::span<const double> z, std::span<const double> v) {
  require_dim(phi, z, "phi_hvp");
  if (v.size() != z.size()) throw DimensionError("phi_hvp: v dim does not match z dim");
  Vector out(z.size(), 0.0);
  for (std::size_t j = 0; j < phi.units(); ++j) {
    const auto row = phi.beta.row(j);
    const double sp = sigmoid_prime(dot(row, z) + phi.bias[j]);
    const double bv = dot(row, v);
    const double w = sp * bv;
    for (std::size_t c = 0; c < z.size(); ++c) out[c] += w * row[c];
  }
  const double two_eps = 2.0 * phi.eps_quad;
  for (std::size_t c = 0; c < z.size(); ++c) out[c] += two_eps * v[c];
  return out;
}

double bregman_div(const GnmPhi& phi, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("bregman_div: x/y dim mismatch");
  require_dim(phi, y, "bregman_div");
  const Vector gy = phi_grad(phi, y);
  double cross = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) cross += (x[c] - y[c]) * gy[c];
  const double value = phi_value(phi, x) - phi_value(phi, y) - cross;
  if (value < kNegativeClamp) {
    throw ConvexityError("bregman_div: value " + std::to_string(value) +
                         " below clamp threshold; phi lost convexity");
  }
  return value < 0.0 ? 0.0 : value;
}

PhiPointCache phi_point_cache(const GnmPhi& phi, std::span<const double> z) {
  require_dim(phi, z, "phi_point_cache");
  PhiPointCache cache;
  const std::size_t m = phi.units();
  cache.act.resize(m);
  cache.sig.resize(m);
  cache.grad.assign(z.size(), 0.0);
  double value = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto row = phi.beta.row(j);
    const double a = dot(row, z) + phi.bias[j];
    const double s = sigmoid(a);
    cache.act[j] = a;
    cache.sig[j] = s;
    value += softplus(a);
    for (std::size_t c = 0; c < z.size(); ++c) cache.grad[c] += s * row[c];
  }
  const double two_eps = 2.0 * phi.eps_quad;
  for (std::size_t c = 0; c < z.size(); ++c) cache.grad[c] += two_eps * z[c];
  cache.value = value + phi.eps_quad * squared_norm(z);
  return cache;
}

double bregman_div_cached(const PhiPointCache& cx, const PhiPointCache& cy,
                          std::span<const double> x, std::span<const double> y) {
  double cross = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) cross += (x[c] - y[c]) * cy.grad[c];
  return cx.value - cy.value - cross;
}

double bregman_div_with_grads(const GnmPhi& phi, std::span<const double> x,
                              std::span<const double> y, DivGrads& out) {
  if (x.size() != y.size()) throw DimensionError("bregman_div_grads: x/y dim mismatch");
  require_dim(phi, y, "bregman_div_grads");
  const std::size_t d = x.size();
  const std::size_t m = phi.units();

  const PhiPointCache cx = phi_point_cache(phi, x);
  const PhiPointCache cy = phi_point_cache(phi, y);

  out.d_x.assign(d, 0.0);
  out.d_y.assign(d, 0.0);
  out.d_beta = Matrix(m, d);
  out.d_bias.assign(m, 0.0);
  out.d_eps = 0.0;

  // d/dx = grad phi(x) - grad phi(y); d/dy = -H(y) (x - y).
  for (std::size_t c = 0; c < d; ++c) out.d_x[c] = cx.grad[c] - cy.grad[c];
  for (std::size_t j = 0; j < m; ++j) {
    const auto row = phi.beta.row(j);
    // beta_j.(x - y) = a_j(x) - a_j(y); the bias cancels.
    const double adiff = cx.act[j] - cy.act[j];
    const double spy = cy.sig[j] * (1.0 - cy.sig[j]);
    const double w = spy * adiff;
    for (std::size_t c = 0; c < d; ++c) out.d_y[c] -= w * row[c];

    // Parameter partials of phi(x) - phi(y) - (x-y).grad phi(y):
    //   d/dbeta_j = sig(a_x) x - sig(a_y) y - sig'(a_y) adiff y - sig(a_y)(x-y)
    //   d/db_j    = sig(a_x) - sig(a_y) - sig'(a_y) adiff
    auto brow = out.d_beta.row(j);
    const double sx = cx.sig[j];
    const double sy = cy.sig[j];
    for (std::size_t c = 0; c < d; ++c) {
      brow[c] = sx * x[c] - sy * y[c] - w * y[c] - sy * (x[c] - y[c]);
    }
    out.d_bias[j] = sx - sy - w;
  }
  const double two_eps = 2.0 * phi.eps_quad;
  double deps = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = x[c] - y[c];
    out.d_y[c] -= two_eps * diff;
    deps += diff * diff;  // ||x||^2 - ||y||^2 - 2y.(x-y) = ||x-y||^2
  }
  out.d_eps = deps;
  return bregman_div_cached(cx, cy, x, y);
}

DivGrads bregman_div_grads(const GnmPhi& phi, std::span<const double> x,
                           std::span<const double> y) {
  DivGrads grads;
  bregman_div_with_grads(phi, x, y, grads);
  return grads;
}

}  // namespace bregman
