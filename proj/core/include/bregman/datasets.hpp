#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bregman/linalg.hpp"

namespace bregman {

struct Dataset {
  Matrix features;          // n x p
  std::vector<int> labels;  // dense ids in [0, class_count)
  int class_count = 0;
  std::string name;

  std::size_t size() const { return features.rows(); }
  std::size_t feature_dim() const { return features.cols(); }

  /// Enforces the structural invariants: labels in range, every class
  /// nonempty, all features finite.
  void validate() const;
};

struct VecPair {
  Vector left;
  Vector right;
};

/// Fig-5 style synthetic matching problem: support pairs are true matches
/// under a fixed nonlinear map, query pairs are a balanced mix of true
/// matches and derangement non-matches.
struct MatchingTask {
  std::vector<VecPair> support_pairs;
  std::vector<VecPair> query_pairs;
  std::vector<int> query_labels;  // 1 = match, 0 = non-match
};

/// C Gaussian clusters with centers on a radius-3 circle (first two
/// coordinates), per-class counts differing by at most one.
Dataset make_blobs(std::size_t n, int classes, std::size_t dim, double spread,
                   std::uint64_t seed);

/// Two interleaved half-circles in 2-D with Gaussian coordinate noise.
Dataset make_two_moons(std::size_t n, double noise, std::uint64_t seed);

/// The frozen nonlinear correlation used by the matching benchmark:
/// right = left + c0 (1 + amp sin(pi x)) (cos(theta0 + omega y),
///                                        sin(theta0 + omega y)).
Vector nonlinear_matching_map(double x, double y);

/// Lefts on a grid_size^2 grid over [-1,1]^2, rights through
/// nonlinear_matching_map plus noise. Half the pairs become the support
/// set; the rest produce one matched and one deranged query pair each.
MatchingTask make_nonlinear_matching(std::size_t grid_size, double noise, std::uint64_t seed);

/// Indices of `points` pairing each element with a different one: sort
/// lexicographically, shift by one along the sorted order.
std::vector<std::size_t> lexicographic_derangement(const std::vector<VecPair>& pairs);

/// CSV ingestion. Header must be f0,...,f{p-1},label; labels remap densely
/// to [0, C) in sorted order. Parse failures name the offending line.
Dataset load_csv(const std::filesystem::path& path);

}  // namespace bregman
