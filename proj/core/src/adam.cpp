#include "bregman/adam.hpp"

#include <cmath>

namespace bregman {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamOptions& opts) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("adam_step[" + state.name + "]: params/grads/moments size mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericError("adam_step[" + state.name + "]: non-finite gradient at index " +
                         std::to_string(i));
    }
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    if (!opts.decoupled_weight_decay) g += opts.weight_decay * params[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    if (opts.lr != 0.0) {
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      params[i] -= opts.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
      if (opts.decoupled_weight_decay) params[i] -= opts.lr * opts.weight_decay * params[i];
    }
  }
}

}  // namespace bregman
