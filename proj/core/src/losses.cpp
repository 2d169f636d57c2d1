#include "bregman/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bregman/softplus.hpp"

namespace bregman {

namespace {

void validate_unit_rows(const Matrix& Z) {
  for (std::size_t i = 0; i < Z.rows(); ++i) {
    const double n = norm(Z.row(i));
    if (std::abs(n - 1.0) > 1e-9) {
      throw NumericError("divergence loss: row " + std::to_string(i) + " has norm " +
                         std::to_string(n) + ", expected unit");
    }
  }
}

double pair_normalizer(const PairSets& pairs) {
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.batch_size; ++i) {
    total += static_cast<double>(pairs.pos_count(i)) * static_cast<double>(pairs.neg_count(i));
  }
  return total;
}

// Ordered-pair coefficient matrix W with loss = sum_{i != t} W[i][t] d(i,t).
//
// Without the hinge the triple sum collapses exactly: a positive t of anchor
// i appears (n-2) times as the pulled pair and |S(i)|-1 times inside other
// brackets, giving |K(i)|^2; a negative t gets -|S(i)||K(i)| from the
// brackets plus |S(i)| from the second term. With the hinge active brackets
// are accumulated one triple at a time from the divergence matrix D.
Matrix pair_weights(const PairSets& pairs, bool clamp_hinge, const Matrix* D) {
  const std::size_t n = pairs.batch_size;
  Matrix W(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ks = static_cast<double>(pairs.neg_count(i));
    const double ss = static_cast<double>(pairs.pos_count(i));
    if (!clamp_hinge) {
      for (int t : pairs.positives[i]) W(i, t) += ks * ks;
      for (int t : pairs.negatives[i]) W(i, t) += -ss * (ks - 1.0);
    } else {
      for (int s : pairs.positives[i]) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || static_cast<int>(j) == s) continue;
          if ((*D)(i, s) - (*D)(i, j) > 0.0) {
            W(i, s) += ks;
            W(i, j) -= ks;
          }
        }
      }
      for (int k : pairs.negatives[i]) W(i, k) += ss;
    }
  }
  return W;
}

}  // namespace

double divergence_loss_from_matrix(const Matrix& D, const PairSets& pairs,
                                   const DivergenceLossOptions& opts) {
  if (D.rows() != pairs.batch_size || D.cols() != pairs.batch_size) {
    throw DimensionError("divergence_loss_from_matrix: D shape does not match batch size");
  }
  const Matrix W = pair_weights(pairs, opts.clamp_hinge, &D);
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.batch_size; ++i) {
    for (std::size_t t = 0; t < pairs.batch_size; ++t) {
      if (W(i, t) != 0.0) total += W(i, t) * D(i, t);
    }
  }
  if (opts.normalize) {
    const double norm = pair_normalizer(pairs);
    if (norm > 0.0) total /= norm;
  }
  return total;
}

LossOutput divergence_loss(const GnmPhi& phi, const Matrix& Z, const PairSets& pairs,
                           const DivergenceLossOptions& opts) {
  const std::size_t n = Z.rows();
  const std::size_t d = Z.cols();
  if (n != pairs.batch_size) {
    throw DimensionError("divergence_loss: batch size mismatch between Z and pair sets");
  }
  if (n < 2) throw DimensionError("divergence_loss: batch must have at least 2 rows");
  if (opts.validate_norms) validate_unit_rows(Z);

  LossOutput out;
  out.grad_embeddings = Matrix(n, d);
  out.grad_phi = PhiGrads{Matrix(phi.units(), d), Vector(phi.units(), 0.0), 0.0};

  const double normalizer = pair_normalizer(pairs);
  if (normalizer == 0.0) return out;  // degenerate batch: single class contributes nothing
  const double scale = opts.normalize ? 1.0 / normalizer : 1.0;

  // Per-point caches make each pair term O(m + d) for the value and
  // O(m d) for gradients.
  std::vector<PhiPointCache> cache(n);
  for (std::size_t i = 0; i < n; ++i) cache[i] = phi_point_cache(phi, Z.row(i));

  Matrix D(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < n; ++t) {
      if (t != i) D(i, t) = bregman_div_cached(cache[i], cache[t], Z.row(i), Z.row(t));
    }
  }

  const Matrix W = pair_weights(pairs, opts.clamp_hinge, &D);
  const std::size_t m = phi.units();
  PhiGrads& pg = *out.grad_phi;
  const double two_eps = 2.0 * phi.eps_quad;

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = Z.row(i);
    const PhiPointCache& cx = cache[i];
    auto gi = out.grad_embeddings.row(i);
    for (std::size_t t = 0; t < n; ++t) {
      const double w0 = W(i, t);
      if (w0 == 0.0 || t == i) continue;
      const double w = w0 * scale;
      total += w0 * D(i, t);
      const auto y = Z.row(t);
      const PhiPointCache& cy = cache[t];
      auto gt = out.grad_embeddings.row(t);
      // d/dx and the quadratic-floor part of d/dy.
      for (std::size_t c = 0; c < d; ++c) {
        gi[c] += w * (cx.grad[c] - cy.grad[c]);
        gt[c] -= w * two_eps * (x[c] - y[c]);
      }
      for (std::size_t j = 0; j < m; ++j) {
        const auto row = phi.beta.row(j);
        const double sx = cx.sig[j];
        const double sy = cy.sig[j];
        const double adiff = cx.act[j] - cy.act[j];
        const double hy = sy * (1.0 - sy) * adiff;
        auto brow = pg.d_beta.row(j);
        for (std::size_t c = 0; c < d; ++c) {
          gt[c] -= w * hy * row[c];
          brow[c] += w * (sx * x[c] - sy * y[c] - hy * y[c] - sy * (x[c] - y[c]));
        }
        pg.d_bias[j] += w * (sx - sy - hy);
      }
      double sq = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = x[c] - y[c];
        sq += diff * diff;
      }
      pg.d_eps += w * sq;
    }
  }
  out.value = total * scale;
  if (!std::isfinite(out.value)) throw NumericError("divergence_loss: non-finite value");
  return out;
}

double softmax_pair_loss_from_gram(const Matrix& G, const PairSets& pairs, int* clamp_count) {
  const std::size_t n = pairs.batch_size;
  if (G.rows() != n || G.cols() != n) {
    throw DimensionError("softmax_pair_loss: Gram shape does not match batch size");
  }
  if (n < 3) throw DimensionError("softmax_pair_loss: batch must have at least 3 rows");
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ks = static_cast<double>(pairs.neg_count(i));
    const double ss = static_cast<double>(pairs.pos_count(i));
    if (pairs.positives[i].empty() && pairs.negatives[i].empty()) continue;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) mx = std::max(mx, G(i, j));
    }
    double sumexp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sumexp += std::exp(G(i, j) - mx);
    }
    const double lse = mx + std::log(sumexp);
    for (int s : pairs.positives[i]) {
      loss -= ks * (G(i, s) - lse);
    }
    for (int k : pairs.negatives[i]) {
      double p = std::exp(G(i, k) - lse);
      if (p >= 1.0 - 1e-12) {
        p = 1.0 - 1e-12;
        if (clamp_count != nullptr) ++*clamp_count;
      }
      loss -= ss * std::log1p(-p);
    }
  }
  return loss;
}

double softmax_pair_loss(const Matrix& Z, const PairSets& pairs, int* clamp_count) {
  if (Z.rows() != pairs.batch_size) {
    throw DimensionError("softmax_pair_loss: batch size mismatch");
  }
  validate_unit_rows(Z);
  const std::size_t n = Z.rows();
  Matrix G(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) G(i, j) = dot(Z.row(i), Z.row(j));
  }
  return softmax_pair_loss_from_gram(G, pairs, clamp_count);
}

LossOutput cross_entropy(const Matrix& logits, std::span<const int> labels) {
  const std::size_t n = logits.rows();
  const std::size_t classes = logits.cols();
  if (labels.size() != n) throw DimensionError("cross_entropy: labels length mismatch");
  LossOutput out;
  out.grad_embeddings = Matrix(n, classes);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw DimensionError("cross_entropy: label " + std::to_string(label) +
                           " out of range [0, " + std::to_string(classes) + ")");
    }
    const auto row = logits.row(i);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double sumexp = 0.0;
    for (double v : row) sumexp += std::exp(v - mx);
    const double lse = mx + std::log(sumexp);
    total += lse - row[label];
    auto grow = out.grad_embeddings.row(i);
    for (std::size_t c = 0; c < classes; ++c) {
      grow[c] = std::exp(row[c] - lse) / static_cast<double>(n);
    }
    grow[label] -= 1.0 / static_cast<double>(n);
  }
  out.value = total / static_cast<double>(n);
  return out;
}

LossOutput joint_loss(const LossOutput& ce, const LossOutput& div, double gamma) {
  if (gamma < 0.0) throw NumericError("joint_loss: gamma must be >= 0");
  if (gamma == 0.0) return ce;
  LossOutput out;
  out.value = ce.value + gamma * div.value;
  if (ce.grad_embeddings.rows() != div.grad_embeddings.rows() ||
      ce.grad_embeddings.cols() != div.grad_embeddings.cols()) {
    throw DimensionError("joint_loss: gradient shapes do not match");
  }
  out.grad_embeddings = ce.grad_embeddings;
  for (std::size_t i = 0; i < out.grad_embeddings.size(); ++i) {
    out.grad_embeddings.data()[i] += gamma * div.grad_embeddings.data()[i];
  }
  if (div.grad_phi.has_value()) {
    PhiGrads scaled = *div.grad_phi;
    for (double& v : scaled.d_beta.storage()) v *= gamma;
    for (double& v : scaled.d_bias) v *= gamma;
    scaled.d_eps *= gamma;
    out.grad_phi = std::move(scaled);
  }
  return out;
}

}  // namespace bregman
