#include "bregman/encoder.hpp"

#include <cmath>
#include <string>

namespace bregman {

MlpEncoder MlpEncoder::random_init(std::span<const std::size_t> dims, RngStream& rng) {
  if (dims.size() < 2) throw DimensionError("MlpEncoder: need at least input and output dims");
  MlpEncoder enc;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l];
    const std::size_t fan_out = dims[l + 1];
    const bool final_layer = (l + 2 == dims.size());
    const double stddev = final_layer ? 1.0 / std::sqrt(static_cast<double>(fan_in))
                                      : std::sqrt(2.0 / static_cast<double>(fan_in));
    DenseLayer layer{Matrix(fan_out, fan_in), Vector(fan_out, 0.0)};
    for (std::size_t r = 0; r < fan_out; ++r) {
      for (std::size_t c = 0; c < fan_in; ++c) layer.weight(r, c) = rng.normal(0.0, stddev);
    }
    enc.layers.push_back(std::move(layer));
  }
  return enc;
}

ForwardTape encoder_forward(const MlpEncoder& enc, std::span<const double> x) {
  if (x.size() != enc.input_dim()) {
    throw DimensionError("encoder_forward: input dim " + std::to_string(x.size()) +
                         " != expected " + std::to_string(enc.input_dim()));
  }
  ForwardTape tape;
  Vector h(x.begin(), x.end());
  const std::size_t L = enc.layers.size();
  for (std::size_t l = 0; l < L; ++l) {
    const DenseLayer& layer = enc.layers[l];
    tape.inputs.push_back(h);
    Vector pre(layer.weight.rows());
    for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
      pre[r] = dot(layer.weight.row(r), h) + layer.bias[r];
    }
    tape.preacts.push_back(pre);
    if (l + 1 < L) {
      for (double& v : pre) v = v > 0.0 ? v : 0.0;  // ReLU
    }
    h = std::move(pre);
  }
  tape.u = h;
  tape.u_norm = norm(tape.u);
  if (tape.u_norm < 1e-12) {
    throw DegenerateInputError("encoder_forward: embedding norm " +
                               std::to_string(tape.u_norm) + " below 1e-12");
  }
  tape.z = tape.u;
  for (double& v : tape.z) v /= tape.u_norm;
  return tape;
}

EncoderGrads EncoderGrads::zeros_like(const MlpEncoder& enc) {
  EncoderGrads g;
  for (const DenseLayer& layer : enc.layers) {
    g.layers.push_back({Matrix(layer.weight.rows(), layer.weight.cols()),
                        Vector(layer.bias.size(), 0.0)});
  }
  g.d_input.assign(enc.input_dim(), 0.0);
  return g;
}

void EncoderGrads::accumulate(const EncoderGrads& other) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].weight.size(); ++i) {
      layers[l].weight.data()[i] += other.layers[l].weight.data()[i];
    }
    for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
      layers[l].bias[i] += other.layers[l].bias[i];
    }
  }
  for (std::size_t i = 0; i < d_input.size(); ++i) d_input[i] += other.d_input[i];
}

EncoderGrads encoder_backward(const MlpEncoder& enc, const ForwardTape& tape,
                              std::span<const double> upstream_z,
                              std::span<const double> upstream_u) {
  const std::size_t L = enc.layers.size();
  if (tape.inputs.size() != L || tape.preacts.size() != L) {
    throw DimensionError("encoder_backward: tape does not match encoder layer count");
  }
  const std::size_t d = enc.output_dim();
  if (!upstream_z.empty() && upstream_z.size() != d) {
    throw DimensionError("encoder_backward: upstream_z dim mismatch");
  }
  if (!upstream_u.empty() && upstream_u.size() != d) {
    throw DimensionError("encoder_backward: upstream_u dim mismatch");
  }

  // du = (g - (g.z) z) / ||u|| + upstream_u
  Vector du(d, 0.0);
  if (!upstream_z.empty()) {
    const double gz = dot(upstream_z, tape.z);
    for (std::size_t c = 0; c < d; ++c) {
      du[c] = (upstream_z[c] - gz * tape.z[c]) / tape.u_norm;
    }
  }
  for (std::size_t c = 0; c < upstream_u.size(); ++c) du[c] += upstream_u[c];

  EncoderGrads grads = EncoderGrads::zeros_like(enc);
  Vector g = std::move(du);
  for (std::size_t l = L; l-- > 0;) {
    const DenseLayer& layer = enc.layers[l];
    if (l + 1 < L) {
      // ReLU mask from the cached pre-activations.
      for (std::size_t r = 0; r < g.size(); ++r) {
        if (tape.preacts[l][r] <= 0.0) g[r] = 0.0;
      }
    }
    const Vector& input = tape.inputs[l];
    DenseLayer& lg = grads.layers[l];
    for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
      for (std::size_t c = 0; c < layer.weight.cols(); ++c) {
        lg.weight(r, c) += g[r] * input[c];
      }
      lg.bias[r] += g[r];
    }
    Vector gin(layer.weight.cols(), 0.0);
    for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
      const auto row = layer.weight.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) gin[c] += g[r] * row[c];
    }
    g = std::move(gin);
  }
  grads.d_input = std::move(g);
  return grads;
}

}  // namespace bregman
