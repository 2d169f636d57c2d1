#pragma once

#include <span>
#include <vector>

#include "bregman/linalg.hpp"
#include "bregman/rng.hpp"

namespace bregman {

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Feed-forward embedding function f_theta: affine -> ReLU stack -> affine,
/// output L2-normalized to the unit sphere.
struct MlpEncoder {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().weight.cols(); }
  std::size_t output_dim() const { return layers.back().weight.rows(); }

  /// He init (std sqrt(2/fan_in)) for ReLU layers, std 1/sqrt(fan_in) for
  /// the final affine; zero biases. dims is the full chain, e.g. {2,64,32,8}.
  static MlpEncoder random_init(std::span<const std::size_t> dims, RngStream& rng);
};

/// Cached forward pass: layer inputs, pre-activations, and the
/// pre-normalization output u.
struct ForwardTape {
  std::vector<Vector> inputs;    // input to each layer (post-ReLU of previous)
  std::vector<Vector> preacts;   // affine outputs before activation
  Vector u;                      // final affine output
  double u_norm = 0.0;
  Vector z;                      // u / ||u||
};

/// z = u / ||u||. Throws DegenerateInputError when ||u|| < 1e-12.
ForwardTape encoder_forward(const MlpEncoder& enc, std::span<const double> x);

struct EncoderGrads {
  std::vector<DenseLayer> layers;  // same shapes as the encoder
  Vector d_input;

  static EncoderGrads zeros_like(const MlpEncoder& enc);
  void accumulate(const EncoderGrads& other);
};

/// Backpropagation. upstream_z flows through the normalization Jacobian
/// (I - z z^T)/||u||; upstream_u (may be empty) is added directly at u —
/// the classifier head taps the pre-normalization feature.
EncoderGrads encoder_backward(const MlpEncoder& enc, const ForwardTape& tape,
                              std::span<const double> upstream_z,
                              std::span<const double> upstream_u = {});

}  // namespace bregman
