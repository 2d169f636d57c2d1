#pragma once

#include <cstdint>
#include <vector>

#include "bregman/datasets.hpp"
#include "bregman/eval.hpp"

namespace bregman {

/// Training knobs for the learned-divergence matcher. Defaults are the
/// calibrated settings the regression threshold was recorded under.
struct MatcherConfig {
  std::size_t m = 56;
  std::size_t epochs = 1200;
  double lr = 0.02;
  double weight_decay = 1e-4;
  double beta_scale = 6.0;  // |beta_j| at init: sharp enough to act as a line detector
  double beta_box = 1.15;   // unit hyperplanes pass through points in [-box, box]^d
  double eps_quad = 1e-3;
  std::uint64_t seed = 9;
};

struct MatcherResult {
  DistanceKind kind = DistanceKind::sq_euclidean;
  double threshold = 0.0;         // match iff distance <= threshold
  double support_accuracy = 0.0;  // calibration accuracy
  double query_accuracy = 0.0;
};

struct MetricComparison {
  std::vector<MatcherResult> results;
  double learned_accuracy = 0.0;
  double best_fixed_accuracy = 0.0;
  double gap = 0.0;  // learned - best fixed
};

/// Harness-specific phi init: unit directions scaled to beta_scale, biases
/// placing each transition hyperplane through a random point of the domain.
GnmPhi matcher_phi_init(std::size_t m, std::size_t dim, const MatcherConfig& cfg, RngStream& rng);

/// Fits phi on the support pairs by minimizing the negative log-likelihood
/// of picking the true right among {true, three derangements} with
/// softmax(-d_phi) scores.
GnmPhi train_bregman_matcher(const MatchingTask& task, const MatcherConfig& cfg);

/// Decision threshold maximizing accuracy on the support matches plus their
/// derangement non-matches; smallest maximizer wins (deterministic).
double calibrate_threshold(const std::vector<double>& match_scores,
                           const std::vector<double>& nonmatch_scores,
                           double* calibration_accuracy = nullptr);

/// One matcher per DistanceKind on identical data; the distance swap is the
/// only difference. Fixed metrics have nothing to fit and only calibrate
/// their threshold.
MetricComparison run_metric_comparison(const MatchingTask& task, const MatcherConfig& cfg);

}  // namespace bregman
