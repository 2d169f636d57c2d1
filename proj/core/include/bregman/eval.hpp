#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bregman/phi.hpp"

namespace bregman {

enum class DistanceKind { learned_bregman, sq_euclidean, cosine_distance, kl_softmax };

/// Bregman divergences are asymmetric; this selects which argument the
/// query occupies. Default matches the anchor position of training.
enum class BregmanDirection { query_first, query_second };

struct DistanceSpec {
  DistanceKind kind = DistanceKind::sq_euclidean;
  BregmanDirection direction = BregmanDirection::query_first;
  const GnmPhi* phi = nullptr;  // required for learned_bregman
};

std::string to_string(DistanceKind kind);
DistanceKind distance_kind_from_string(const std::string& name);

/// Pairwise distance under the spec; a and b play (query, reference).
double pair_distance(const DistanceSpec& spec, std::span<const double> a,
                     std::span<const double> b);

struct KnnPrediction {
  int label = 0;
  Vector class_scores;  // vote fraction per class
};

/// k smallest distances (ties broken by lower index), majority vote (vote
/// ties broken by smaller class id), scores are vote fractions.
KnnPrediction knn_predict(const Matrix& train_Z, std::span<const int> train_y,
                          std::span<const double> query, std::size_t k,
                          const DistanceSpec& spec, int class_count = 0);

double accuracy(std::span<const int> predictions, std::span<const int> labels);

/// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(equal).
/// Throws NumericError when only one class is present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Macro-averaged one-vs-rest over classes with both positives and
/// negatives present.
double roc_auc_ovr(const Matrix& scores, std::span<const int> labels);

/// Disjoint, exhaustive folds with sizes differing by at most 1;
/// deterministic given the seed.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t folds,
                                                  std::uint64_t seed);

struct FoldStats {
  double accuracy = 0.0;
  std::optional<double> auc;
  std::size_t size = 0;
};

struct EvalReport {
  double accuracy = 0.0;  // pooled correct/total over all folds
  double auc = 0.0;       // pooled macro one-vs-rest
  std::vector<FoldStats> folds;
  std::vector<std::vector<std::int64_t>> confusion;  // C x C counts

  std::string to_json() const;
};

/// k-fold kNN evaluation over precomputed embeddings: each fold is queried
/// against the union of the others.
EvalReport evaluate_kfold(const Matrix& Z, std::span<const int> labels, int class_count,
                          std::size_t folds, std::size_t k, const DistanceSpec& spec,
                          std::uint64_t seed);

}  // namespace bregman
