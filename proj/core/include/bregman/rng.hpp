#pragma once

#include <cstdint>
#include <vector>

#include "bregman/linalg.hpp"

namespace bregman {

/// Deterministic counter-based random stream (splitmix64 core).
///
/// The generator is pure 64-bit integer arithmetic, so a given seed
/// reproduces the same draw sequence on every platform. Floating-point
/// transforms (uniform, Gaussian) are fixed formulas over those integers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t seed_state() const { return state_; }
  std::uint64_t draws() const { return counter_; }

  /// Next raw 64-bit value (splitmix64).
  std::uint64_t next_u64();

  /// Uniform double in (0, 1], 53-bit resolution.
  double uniform01();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller. Consumes exactly two draws.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, bound) via 128-bit multiply-shift.
  std::uint64_t uniform_int(std::uint64_t bound);

  /// Fisher-Yates shuffle, in place.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n);

  Vector normal_vector(std::size_t n, double stddev = 1.0);

  /// Independent stream derived from (seed, stream_id); used to keep
  /// e.g. encoder init draws unaffected by whether phi is initialized.
  RngStream derive(std::uint64_t stream_id) const;

 private:
  std::uint64_t state_;
  std::uint64_t counter_ = 0;
};

}  // namespace bregman
