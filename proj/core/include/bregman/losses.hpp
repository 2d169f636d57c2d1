#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bregman/phi.hpp"

namespace bregman {

/// Per-anchor positive index set S(i) (same label, j != i) and negative
/// index set K(i) (different label).
struct PairSets {
  std::vector<std::vector<int>> positives;
  std::vector<std::vector<int>> negatives;
  std::size_t batch_size = 0;

  std::size_t pos_count(std::size_t i) const { return positives[i].size(); }
  std::size_t neg_count(std::size_t i) const { return negatives[i].size(); }
};

/// Gradient blocks of phi carried alongside a loss value.
struct PhiGrads {
  Matrix d_beta;
  Vector d_bias;
  double d_eps = 0.0;
};

struct LossOutput {
  double value = 0.0;
  Matrix grad_embeddings;             // n x d (or n x C for logits losses)
  std::optional<PhiGrads> grad_phi;   // absent for phi-free losses
};

struct DivergenceLossOptions {
  bool clamp_hinge = false;
  // Divide by sum_i |S(i)||K(i)| so gamma keeps a batch-size-independent
  // meaning; set false to reproduce the literal unnormalized sum.
  bool normalize = true;
  // The trainer feeds unit-norm rows; finite-difference checks perturb rows
  // off the sphere and disable this.
  bool validate_norms = true;
};

/// Divergence metric loss over a batch of embeddings.
///
/// Canonical form (anchor i, positives s in S(i), negatives k in K(i)):
///
///   sum_i |K(i)| sum_{s in S(i)} sum_{j != i,s} [d_phi(z_i,z_s) - d_phi(z_i,z_j)]
///   + sum_i |S(i)| sum_{k in K(i)} d_phi(z_i,z_k)
///
/// divided by sum_i |S(i)||K(i)| when normalize is on. The bracket carries
/// the sign of the negative log-likelihood it is the first-order expansion
/// of: pulling a positive closer to its anchor lowers the loss, pulling a
/// negative closer raises it. With clamp_hinge each bracket is replaced by
/// max(0, .). Gradients accumulate through every d_phi term into both the
/// embeddings and the phi parameter blocks.
LossOutput divergence_loss(const GnmPhi& phi, const Matrix& Z, const PairSets& pairs,
                           const DivergenceLossOptions& opts = {});

/// Value-only evaluation of the same loss from a precomputed pairwise
/// divergence matrix D (D[i][t] = d_phi(z_i, z_t)). This is the level at
/// which the directional-consistency property is stated: the loss is a
/// functional of pairwise divergences alone.
double divergence_loss_from_matrix(const Matrix& D, const PairSets& pairs,
                                   const DivergenceLossOptions& opts = {});

/// Softmax pair negative log-likelihood (value-only verification oracle):
///
///   -sum_i |K(i)| sum_{s in S(i)} log p(y_i|x_i,x_s)
///   -sum_i |S(i)| sum_{k in K(i)} log(1 - p(y_i|x_i,x_k))
///
/// with p(y_i|x_i,x_t) = exp(z_i.z_t) / sum_{j != i} exp(z_i.z_j), computed
/// with log-sum-exp stabilization. Probabilities numerically equal to 1
/// clamp to 1 - 1e-12 and bump *clamp_count when provided.
double softmax_pair_loss(const Matrix& Z, const PairSets& pairs, int* clamp_count = nullptr);

/// Same loss evaluated from a precomputed Gram matrix G[i][j] = z_i.z_j.
double softmax_pair_loss_from_gram(const Matrix& G, const PairSets& pairs,
                                   int* clamp_count = nullptr);

/// Mean cross-entropy over the batch. grad_embeddings holds d/dlogits =
/// (softmax - onehot) / n.
LossOutput cross_entropy(const Matrix& logits, std::span<const int> labels);

/// value = ce.value + gamma * div.value, gradients combined linearly.
/// gamma = 0 returns ce unchanged (bit-identical).
LossOutput joint_loss(const LossOutput& ce, const LossOutput& div, double gamma);

}  // namespace bregman
