#include "bregman/matching.hpp"

#include <algorithm>
#include <cmath>

#include "bregman/adam.hpp"

namespace bregman {

GnmPhi matcher_phi_init(std::size_t m, std::size_t dim, const MatcherConfig& cfg,
                        RngStream& rng) {
  Matrix beta(m, dim);
  Vector bias(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    Vector dir = rng.normal_vector(dim);
    const double n = norm(dir);
    double b = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double w = cfg.beta_scale * dir[c] / n;
      beta(j, c) = w;
      b -= w * rng.uniform(-cfg.beta_box, cfg.beta_box);
    }
    bias[j] = b;
  }
  GnmPhi phi(std::move(beta), std::move(bias), cfg.eps_quad);
  return phi;
}

namespace {

// Accumulates w * d(d_phi(x, y))/d{beta, bias} into the gradient buffers.
void accumulate_pair_grads(const GnmPhi& phi, std::span<const double> x,
                           std::span<const double> y, double w, Matrix& d_beta, Vector& d_bias) {
  DivGrads g;
  bregman_div_with_grads(phi, x, y, g);
  for (std::size_t i = 0; i < d_beta.size(); ++i) {
    d_beta.data()[i] += w * g.d_beta.data()[i];
  }
  for (std::size_t j = 0; j < d_bias.size(); ++j) d_bias[j] += w * g.d_bias[j];
}

std::vector<double> pair_scores(const DistanceSpec& spec, const std::vector<VecPair>& pairs) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const VecPair& p : pairs) scores.push_back(pair_distance(spec, p.left, p.right));
  return scores;
}

}  // namespace

GnmPhi train_bregman_matcher(const MatchingTask& task, const MatcherConfig& cfg) {
  const std::size_t n = task.support_pairs.size();
  if (n < 3) throw DimensionError("train_bregman_matcher: need at least 3 support pairs");
  const std::size_t dim = task.support_pairs.front().left.size();

  RngStream rng(cfg.seed);
  GnmPhi phi = matcher_phi_init(cfg.m, dim, cfg, rng);

  // Wrong-right candidates: shift-by-one derangement, its square, and its
  // inverse along the lexicographic order of the support lefts.
  const std::vector<std::size_t> der1 = lexicographic_derangement(task.support_pairs);
  std::vector<std::size_t> der2(n);
  std::vector<std::size_t> inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    der2[i] = der1[der1[i]];
    inv[der1[i]] = i;
  }
  const std::vector<const std::vector<std::size_t>*> derangements = {&der1, &der2, &inv};
  const std::size_t candidates = 1 + derangements.size();

  AdamState beta_state(phi.beta.size(), "matcher.beta");
  AdamState bias_state(phi.bias.size(), "matcher.bias");
  const AdamOptions opts{cfg.lr, cfg.weight_decay, false};

  std::vector<double> d(candidates);
  Matrix d_beta(phi.units(), dim);
  Vector d_bias(phi.units(), 0.0);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(d_beta.storage().begin(), d_beta.storage().end(), 0.0);
    std::fill(d_bias.begin(), d_bias.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Vector& left = task.support_pairs[i].left;
      d[0] = bregman_div(phi, left, task.support_pairs[i].right);
      for (std::size_t c = 0; c < derangements.size(); ++c) {
        d[c + 1] = bregman_div(phi, left, task.support_pairs[(*derangements[c])[i]].right);
      }
      // softmax over logits -d; NLL of the true candidate (index 0).
      double mx = -d[0];
      for (std::size_t c = 1; c < candidates; ++c) mx = std::max(mx, -d[c]);
      double sum = 0.0;
      for (std::size_t c = 0; c < candidates; ++c) sum += std::exp(-d[c] - mx);
      for (std::size_t c = 0; c < candidates; ++c) {
        const double p = std::exp(-d[c] - mx) / sum;
        // dNLL/dd_c = -(p_c - [c == 0]) ; divide by n for a mean loss.
        const double w = -(p - (c == 0 ? 1.0 : 0.0)) / static_cast<double>(n);
        const Vector& right = c == 0 ? task.support_pairs[i].right
                                     : task.support_pairs[(*derangements[c - 1])[i]].right;
        accumulate_pair_grads(phi, left, right, w, d_beta, d_bias);
      }
    }
    adam_step(phi.beta.storage(), d_beta.storage(), beta_state, opts);
    adam_step(phi.bias, d_bias, bias_state, opts);
  }
  return phi;
}

double calibrate_threshold(const std::vector<double>& match_scores,
                           const std::vector<double>& nonmatch_scores,
                           double* calibration_accuracy) {
  std::vector<std::pair<double, int>> scored;  // (score, is_match)
  for (double s : match_scores) scored.emplace_back(s, 1);
  for (double s : nonmatch_scores) scored.emplace_back(s, 0);
  std::sort(scored.begin(), scored.end());
  const double total = static_cast<double>(scored.size());

  // Threshold tau classifies "match iff score <= tau"; sweep the sorted
  // scores so matches_below grows one step at a time. The all-nonmatch
  // option (tau below every score) seeds the search.
  double best_tau = scored.front().first - 1.0;
  double best_acc = static_cast<double>(nonmatch_scores.size()) / total;
  std::size_t matches_below = 0;
  std::size_t nonmatches_below = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].second == 1) {
      ++matches_below;
    } else {
      ++nonmatches_below;
    }
    // Advance over ties so tau = value includes every equal score.
    if (i + 1 < scored.size() && scored[i + 1].first == scored[i].first) continue;
    const double acc =
        (static_cast<double>(matches_below) +
         static_cast<double>(nonmatch_scores.size() - nonmatches_below)) / total;
    if (acc > best_acc) {
      best_acc = acc;
      best_tau = scored[i].first;
    }
  }
  if (calibration_accuracy != nullptr) *calibration_accuracy = best_acc;
  return best_tau;
}

MetricComparison run_metric_comparison(const MatchingTask& task, const MatcherConfig& cfg) {
  const std::vector<std::size_t> support_der = lexicographic_derangement(task.support_pairs);
  std::vector<VecPair> support_nonmatches;
  support_nonmatches.reserve(task.support_pairs.size());
  for (std::size_t i = 0; i < task.support_pairs.size(); ++i) {
    support_nonmatches.push_back(
        {task.support_pairs[i].left, task.support_pairs[support_der[i]].right});
  }

  GnmPhi learned = train_bregman_matcher(task, cfg);

  MetricComparison cmp;
  const DistanceKind kinds[] = {DistanceKind::learned_bregman, DistanceKind::sq_euclidean,
                                DistanceKind::cosine_distance, DistanceKind::kl_softmax};
  for (DistanceKind kind : kinds) {
    DistanceSpec spec{kind, BregmanDirection::query_first,
                      kind == DistanceKind::learned_bregman ? &learned : nullptr};
    MatcherResult res;
    res.kind = kind;
    const std::vector<double> m_sup = pair_scores(spec, task.support_pairs);
    const std::vector<double> nm_sup = pair_scores(spec, support_nonmatches);
    res.threshold = calibrate_threshold(m_sup, nm_sup, &res.support_accuracy);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < task.query_pairs.size(); ++i) {
      const double s =
          pair_distance(spec, task.query_pairs[i].left, task.query_pairs[i].right);
      const int predicted = s <= res.threshold ? 1 : 0;
      if (predicted == task.query_labels[i]) ++correct;
    }
    res.query_accuracy = static_cast<double>(correct) / static_cast<double>(task.query_pairs.size());
    cmp.results.push_back(res);
  }

  for (const MatcherResult& r : cmp.results) {
    if (r.kind == DistanceKind::learned_bregman) {
      cmp.learned_accuracy = r.query_accuracy;
    } else {
      cmp.best_fixed_accuracy = std::max(cmp.best_fixed_accuracy, r.query_accuracy);
    }
  }
  cmp.gap = cmp.learned_accuracy - cmp.best_fixed_accuracy;
  return cmp;
}

}  // namespace bregman
