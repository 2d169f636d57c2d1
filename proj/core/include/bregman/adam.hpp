#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bregman/errors.hpp"

namespace bregman {

/// Per-parameter-block Adam state (first/second moments + step count).
struct AdamState {
  explicit AdamState(std::size_t size, std::string block_name = "params")
      : first_moment(size, 0.0), second_moment(size, 0.0), name(std::move(block_name)) {}

  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::string name;
};

struct AdamOptions {
  double lr = 1e-4;
  double weight_decay = 0.0;
  // Default couples decay into the gradient (plain L2 term). Decoupled
  // form subtracts lr*wd*theta after the moment update instead.
  bool decoupled_weight_decay = false;
};

/// One Adam update with bias correction. Mutates params and state in place.
/// Throws NumericError naming the block if any gradient entry is non-finite.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamOptions& opts);

}  // namespace bregman
