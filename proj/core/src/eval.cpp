#include "bregman/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bregman/rng.hpp"
#include "bregman/softplus.hpp"

#include "json.hpp"

namespace bregman {

std::string to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::learned_bregman: return "learned_bregman";
    case DistanceKind::sq_euclidean: return "sq_euclidean";
    case DistanceKind::cosine_distance: return "cosine_distance";
    case DistanceKind::kl_softmax: return "kl_softmax";
  }
  return "unknown";
}

DistanceKind distance_kind_from_string(const std::string& name) {
  if (name == "learned_bregman") return DistanceKind::learned_bregman;
  if (name == "sq_euclidean") return DistanceKind::sq_euclidean;
  if (name == "cosine_distance") return DistanceKind::cosine_distance;
  if (name == "kl_softmax") return DistanceKind::kl_softmax;
  throw ConfigError("unknown distance kind '" + name + "'");
}

namespace {

double sq_euclidean(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw DegenerateInputError("cosine_distance: zero-norm input");
  }
  return 1.0 - dot(a, b) / (na * nb);
}

Vector softmax_map(std::span<const double> v) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  Vector p(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    p[i] = std::exp(v[i] - mx);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

// KL(softmax(query) || softmax(reference)); embeddings are mapped to the
// simplex because KL needs distributions.
double kl_softmax(std::span<const double> q, std::span<const double> r) {
  const Vector p = softmax_map(q);
  const Vector s = softmax_map(r);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * (std::log(p[i]) - std::log(s[i]));
  return acc;
}

}  // namespace

double pair_distance(const DistanceSpec& spec, std::span<const double> a,
                     std::span<const double> b) {
  switch (spec.kind) {
    case DistanceKind::sq_euclidean: return sq_euclidean(a, b);
    case DistanceKind::cosine_distance: return cosine_distance(a, b);
    case DistanceKind::kl_softmax: return kl_softmax(a, b);
    case DistanceKind::learned_bregman: {
      if (spec.phi == nullptr) {
        throw ConfigError("learned_bregman distance requires an attached GnmPhi");
      }
      return spec.direction == BregmanDirection::query_first ? bregman_div(*spec.phi, a, b)
                                                             : bregman_div(*spec.phi, b, a);
    }
  }
  throw ConfigError("pair_distance: unhandled distance kind");
}

KnnPrediction knn_predict(const Matrix& train_Z, std::span<const int> train_y,
                          std::span<const double> query, std::size_t k,
                          const DistanceSpec& spec, int class_count) {
  const std::size_t n = train_Z.rows();
  if (train_y.size() != n) throw DimensionError("knn_predict: labels length mismatch");
  if (k < 1 || k > n) {
    throw DimensionError("knn_predict: k = " + std::to_string(k) +
                         " not in [1, " + std::to_string(n) + "]");
  }
  if (class_count <= 0) {
    for (int y : train_y) class_count = std::max(class_count, y + 1);
  }

  std::vector<std::pair<double, std::size_t>> dists;
  dists.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    dists.emplace_back(pair_distance(spec, query, train_Z.row(i)), i);
  }
  // Ties broken by lower index (the pair's second member).
  std::partial_sort(dists.begin(), dists.begin() + k, dists.end());

  std::vector<std::size_t> votes(class_count, 0);
  for (std::size_t r = 0; r < k; ++r) ++votes[train_y[dists[r].second]];
  int best = 0;
  for (int c = 1; c < class_count; ++c) {
    if (votes[c] > votes[best]) best = c;  // vote ties keep the smaller id
  }
  KnnPrediction pred;
  pred.label = best;
  pred.class_scores.resize(class_count);
  for (int c = 0; c < class_count; ++c) {
    pred.class_scores[c] = static_cast<double>(votes[c]) / static_cast<double>(k);
  }
  return pred;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("accuracy: predictions/labels length mismatch");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("roc_auc: length mismatch");
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (int y : labels) (y != 0 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw NumericError("roc_auc: undefined for single-class input");
  }
  double wins = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double roc_auc_ovr(const Matrix& scores, std::span<const int> labels) {
  if (scores.rows() != labels.size()) throw DimensionError("roc_auc_ovr: length mismatch");
  const int classes = static_cast<int>(scores.cols());
  double total = 0.0;
  int used = 0;
  Vector class_scores(labels.size());
  std::vector<int> binary(labels.size());
  for (int c = 0; c < classes; ++c) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      class_scores[i] = scores(i, c);
      binary[i] = labels[i] == c ? 1 : 0;
      pos += binary[i];
    }
    if (pos == 0 || pos == labels.size()) continue;
    total += roc_auc(class_scores, binary);
    ++used;
  }
  if (used == 0) throw NumericError("roc_auc_ovr: no class has both positives and negatives");
  return total / used;
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t folds,
                                                  std::uint64_t seed) {
  if (folds < 2) throw ConfigError("kfold_split: folds must be >= 2");
  if (n < folds) throw ConfigError("kfold_split: n must be >= folds");
  RngStream rng(seed);
  const std::vector<std::size_t> perm = rng.permutation(n);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t i = 0; i < n; ++i) out[i % folds].push_back(perm[i]);
  return out;
}

EvalReport evaluate_kfold(const Matrix& Z, std::span<const int> labels, int class_count,
                          std::size_t folds, std::size_t k, const DistanceSpec& spec,
                          std::uint64_t seed) {
  const std::size_t n = Z.rows();
  const auto fold_sets = kfold_split(n, folds, seed);

  EvalReport report;
  report.confusion.assign(class_count, std::vector<std::int64_t>(class_count, 0));
  std::size_t correct_total = 0;
  Matrix pooled_scores(n, class_count);
  std::vector<int> pooled_labels(n);
  std::size_t pooled_at = 0;

  for (const auto& fold : fold_sets) {
    const std::size_t train_n = n - fold.size();
    if (k > train_n) {
      throw DimensionError("evaluate_kfold: k = " + std::to_string(k) +
                           " exceeds fold train size " + std::to_string(train_n));
    }
    Matrix train_Z(train_n, Z.cols());
    std::vector<int> train_y(train_n);
    std::vector<char> in_fold(n, 0);
    for (std::size_t q : fold) in_fold[q] = 1;
    std::size_t at = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_fold[i]) continue;
      for (std::size_t c = 0; c < Z.cols(); ++c) train_Z(at, c) = Z(i, c);
      train_y[at] = labels[i];
      ++at;
    }

    FoldStats stats;
    stats.size = fold.size();
    std::size_t correct = 0;
    Matrix fold_scores(fold.size(), class_count);
    std::vector<int> fold_labels(fold.size());
    for (std::size_t qi = 0; qi < fold.size(); ++qi) {
      const std::size_t q = fold[qi];
      const KnnPrediction pred = knn_predict(train_Z, train_y, Z.row(q), k, spec, class_count);
      if (pred.label == labels[q]) ++correct;
      ++report.confusion[labels[q]][pred.label];
      fold_labels[qi] = labels[q];
      pooled_labels[pooled_at] = labels[q];
      for (int c = 0; c < class_count; ++c) {
        fold_scores(qi, c) = pred.class_scores[c];
        pooled_scores(pooled_at, c) = pred.class_scores[c];
      }
      ++pooled_at;
    }
    correct_total += correct;
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(fold.size());
    try {
      stats.auc = roc_auc_ovr(fold_scores, fold_labels);
    } catch (const NumericError&) {
      stats.auc = std::nullopt;  // fold missing a class
    }
    report.folds.push_back(stats);
  }

  report.accuracy = static_cast<double>(correct_total) / static_cast<double>(n);
  report.auc = roc_auc_ovr(pooled_scores, pooled_labels);
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["accuracy"] = accuracy;
  j["auc"] = auc;
  j["folds"] = nlohmann::ordered_json::array();
  for (const FoldStats& f : folds) {
    nlohmann::ordered_json jf;
    jf["accuracy"] = f.accuracy;
    if (f.auc.has_value()) {
      jf["auc"] = *f.auc;
    } else {
      jf["auc"] = nullptr;
    }
    jf["size"] = f.size;
    j["folds"].push_back(jf);
  }
  j["confusion"] = confusion;
  return j.dump(2) + "\n";
}

}  // namespace bregman
