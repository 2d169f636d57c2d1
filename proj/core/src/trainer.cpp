#include "bregman/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace bregman {

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("TrainConfig: batch_size must be >= 2");
  if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
  if (knn_k < 1) throw ConfigError("TrainConfig: knn_k must be >= 1");
  if (gamma < 0.0) throw ConfigError("TrainConfig: gamma must be >= 0");
  if (eps_quad < 0.0) throw ConfigError("TrainConfig: eps_quad must be >= 0");
  if (m == 0 && !(eps_quad > 0.0)) {
    throw ConfigError("TrainConfig: m = 0 requires eps_quad > 0");
  }
  if (lr < 0.0 || weight_decay < 0.0) {
    throw ConfigError("TrainConfig: lr and weight_decay must be >= 0");
  }
  if (!encoder_dims.empty()) {
    if (encoder_dims.size() < 2) throw ConfigError("TrainConfig: encoder_dims needs >= 2 entries");
    for (std::size_t d : encoder_dims) {
      if (d == 0) throw ConfigError("TrainConfig: encoder_dims entries must be positive");
    }
  }
}

std::vector<std::size_t> TrainConfig::resolve_encoder_dims(std::size_t input_dim) const {
  if (encoder_dims.empty()) return {input_dim, 64, 32, 8};
  if (encoder_dims.front() != input_dim) {
    throw DimensionError("encoder_dims front " + std::to_string(encoder_dims.front()) +
                         " does not match dataset feature dim " + std::to_string(input_dim));
  }
  return encoder_dims;
}

PairSets build_pair_sets(std::span<const int> labels) {
  PairSets ps;
  const std::size_t n = labels.size();
  ps.batch_size = n;
  ps.positives.resize(n);
  ps.negatives.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (labels[j] == labels[i]) {
        ps.positives[i].push_back(static_cast<int>(j));
      } else {
        ps.negatives[i].push_back(static_cast<int>(j));
      }
    }
  }
  return ps;
}

Vector TrainerState::parameter_snapshot() const {
  Vector snap;
  for (const DenseLayer& layer : encoder.layers) {
    snap.insert(snap.end(), layer.weight.storage().begin(), layer.weight.storage().end());
    snap.insert(snap.end(), layer.bias.begin(), layer.bias.end());
  }
  snap.insert(snap.end(), head.weight.storage().begin(), head.weight.storage().end());
  snap.insert(snap.end(), head.bias.begin(), head.bias.end());
  snap.insert(snap.end(), phi.beta.storage().begin(), phi.beta.storage().end());
  snap.insert(snap.end(), phi.bias.begin(), phi.bias.end());
  snap.push_back(phi.eps_quad);
  return snap;
}

TrainerState make_trainer_state(const Dataset& data, const TrainConfig& cfg) {
  // Separate derived streams keep encoder/head draws independent of whether
  // (and how large) phi is initialized; a CE-only run sees identical bits.
  RngStream root(cfg.seed);
  RngStream rng_model = root.derive(1);
  RngStream rng_phi = root.derive(2);

  const std::vector<std::size_t> dims = cfg.resolve_encoder_dims(data.feature_dim());
  const std::size_t d = dims.back();
  const std::size_t classes = static_cast<std::size_t>(data.class_count);

  TrainerState st;
  st.encoder = MlpEncoder::random_init(dims, rng_model);
  st.head.weight = Matrix(classes, d);
  const double head_std = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t r = 0; r < classes; ++r) {
    for (std::size_t c = 0; c < d; ++c) st.head.weight(r, c) = rng_model.normal(0.0, head_std);
  }
  st.head.bias.assign(classes, 0.0);
  st.phi = GnmPhi::random_init(cfg.m, d, cfg.eps_quad, rng_phi);
  st.phi.eps_trainable = cfg.eps_trainable;
  st.eps_floor = cfg.eps_quad;

  for (std::size_t l = 0; l < st.encoder.layers.size(); ++l) {
    st.adam_enc_w.emplace_back(st.encoder.layers[l].weight.size(),
                               "encoder.layer" + std::to_string(l) + ".weight");
    st.adam_enc_b.emplace_back(st.encoder.layers[l].bias.size(),
                               "encoder.layer" + std::to_string(l) + ".bias");
  }
  st.adam_head.emplace_back(st.head.weight.size(), "head.weight");
  st.adam_head.emplace_back(st.head.bias.size(), "head.bias");
  st.adam_phi.emplace_back(st.phi.beta.size(), "phi.beta");
  st.adam_phi.emplace_back(st.phi.bias.size(), "phi.bias");
  if (cfg.eps_trainable) st.adam_phi.emplace_back(1, "phi.eps_quad");
  return st;
}

namespace {

struct BatchForward {
  Matrix U;
  Matrix Z;
  std::vector<ForwardTape> tapes;
  Matrix logits;
};

BatchForward forward_batch(const TrainerState& st, const Dataset& data,
                           std::span<const std::size_t> idx) {
  const std::size_t nb = idx.size();
  const std::size_t d = st.encoder.output_dim();
  const std::size_t classes = st.head.weight.rows();
  BatchForward fwd;
  fwd.U = Matrix(nb, d);
  fwd.Z = Matrix(nb, d);
  fwd.logits = Matrix(nb, classes);
  fwd.tapes.reserve(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    fwd.tapes.push_back(encoder_forward(st.encoder, data.features.row(idx[i])));
    const ForwardTape& tape = fwd.tapes.back();
    for (std::size_t c = 0; c < d; ++c) {
      fwd.U(i, c) = tape.u[c];
      fwd.Z(i, c) = tape.z[c];
    }
    for (std::size_t r = 0; r < classes; ++r) {
      fwd.logits(i, r) = dot(st.head.weight.row(r), tape.u) + st.head.bias[r];
    }
  }
  return fwd;
}

struct HeadBackward {
  Matrix d_weight;
  Vector d_bias;
  Matrix dU;  // nb x d
};

HeadBackward backward_head(const ClassifierHead& head, const Matrix& U, const Matrix& dlogits) {
  const std::size_t nb = U.rows();
  const std::size_t d = U.cols();
  const std::size_t classes = head.weight.rows();
  HeadBackward hb;
  hb.d_weight = Matrix(classes, d);
  hb.d_bias.assign(classes, 0.0);
  hb.dU = Matrix(nb, d);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t r = 0; r < classes; ++r) {
      const double g = dlogits(i, r);
      hb.d_bias[r] += g;
      for (std::size_t c = 0; c < d; ++c) {
        hb.d_weight(r, c) += g * U(i, c);
        hb.dU(i, c) += g * head.weight(r, c);
      }
    }
  }
  return hb;
}

void step_encoder_and_head(TrainerState& st, const EncoderGrads& eg, const HeadBackward& hb,
                           const AdamOptions& opts) {
  for (std::size_t l = 0; l < st.encoder.layers.size(); ++l) {
    adam_step(st.encoder.layers[l].weight.storage(), eg.layers[l].weight.storage(),
              st.adam_enc_w[l], opts);
    adam_step(st.encoder.layers[l].bias, eg.layers[l].bias, st.adam_enc_b[l], opts);
  }
  adam_step(st.head.weight.storage(), hb.d_weight.storage(), st.adam_head[0], opts);
  adam_step(st.head.bias, hb.d_bias, st.adam_head[1], opts);
}

}  // namespace

EpochRecord train_epoch(TrainerState& st, const Dataset& data, const TrainConfig& cfg,
                        RngStream& shuffle_rng, std::size_t epoch_index) {
  const std::size_t n = data.size();
  const std::vector<std::size_t> perm = shuffle_rng.permutation(n);
  const AdamOptions opts{cfg.lr, cfg.weight_decay, cfg.decoupled_weight_decay};
  const DivergenceLossOptions div_opts{cfg.clamp_hinge, cfg.normalize_divergence, true};

  double ce_sum = 0.0;
  double div_sum = 0.0;
  double joint_sum = 0.0;
  std::size_t batch_index = 0;

  for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
    const std::size_t nb = std::min(cfg.batch_size, n - start);
    const std::span<const std::size_t> idx(perm.data() + start, nb);
    std::vector<int> yb(nb);
    for (std::size_t i = 0; i < nb; ++i) yb[i] = data.labels[idx[i]];

    BatchForward fwd = forward_batch(st, data, idx);
    const LossOutput ce = cross_entropy(fwd.logits, yb);

    const bool use_div = cfg.gamma > 0.0 && nb >= 2;
    LossOutput div;
    if (use_div) {
      const PairSets pairs = build_pair_sets(yb);
      div = divergence_loss(st.phi, fwd.Z, pairs, div_opts);
    }

    const double div_value = use_div ? div.value : 0.0;
    const double joint = ce.value + cfg.gamma * div_value;
    if (!std::isfinite(joint)) {
      throw NumericError("train_epoch: non-finite joint loss at epoch " +
                         std::to_string(epoch_index) + " batch " + std::to_string(batch_index));
    }
    // Recorded before the updates so epoch 0 reflects initialization.
    ce_sum += ce.value * static_cast<double>(nb);
    div_sum += div_value * static_cast<double>(nb);
    joint_sum += joint * static_cast<double>(nb);

    const HeadBackward hb = backward_head(st.head, fwd.U, ce.grad_embeddings);
    EncoderGrads eg = EncoderGrads::zeros_like(st.encoder);
    Vector upstream_z;
    for (std::size_t i = 0; i < nb; ++i) {
      std::span<const double> up_z;
      if (use_div) {
        const auto row = div.grad_embeddings.row(i);
        upstream_z.assign(row.begin(), row.end());
        for (double& v : upstream_z) v *= cfg.gamma;
        up_z = upstream_z;
      }
      eg.accumulate(encoder_backward(st.encoder, fwd.tapes[i], up_z, hb.dU.row(i)));
    }
    step_encoder_and_head(st, eg, hb, opts);

    if (use_div) {
      PhiGrads pg = *div.grad_phi;
      for (double& v : pg.d_beta.storage()) v *= cfg.gamma;
      for (double& v : pg.d_bias) v *= cfg.gamma;
      pg.d_eps *= cfg.gamma;
      adam_step(st.phi.beta.storage(), pg.d_beta.storage(), st.adam_phi[0], opts);
      adam_step(st.phi.bias, pg.d_bias, st.adam_phi[1], opts);
      if (cfg.eps_trainable) {
        adam_step(std::span<double>(&st.phi.eps_quad, 1), std::span<const double>(&pg.d_eps, 1),
                  st.adam_phi[2], opts);
        // Convexity floor survives every update.
        if (st.phi.eps_quad < st.eps_floor) st.phi.eps_quad = st.eps_floor;
      }
    }
  }

  const double total = static_cast<double>(n);
  return {epoch_index, ce_sum / total, div_sum / total, joint_sum / total};
}

FitResult fit(const Dataset& data, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  data.validate();
  if (data.class_count < 2) {
    std::fprintf(stderr,
                 "warning: dataset '%s' has a single class; divergence term is identically "
                 "zero\n",
                 data.name.c_str());
  }
  FitResult result{make_trainer_state(data, cfg), {}};
  RngStream shuffle_rng = RngStream(cfg.seed).derive(3);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    result.history.records.push_back(train_epoch(result.state, data, cfg, shuffle_rng, epoch));
    if (on_epoch) on_epoch(epoch, result.state);
  }
  return result;
}

FitResult fit_ce_only(const Dataset& data, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  data.validate();
  FitResult result{make_trainer_state(data, cfg), {}};
  TrainerState& st = result.state;
  RngStream shuffle_rng = RngStream(cfg.seed).derive(3);
  const AdamOptions opts{cfg.lr, cfg.weight_decay, cfg.decoupled_weight_decay};
  const std::size_t n = data.size();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> perm = shuffle_rng.permutation(n);
    double ce_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t nb = std::min(cfg.batch_size, n - start);
      const std::span<const std::size_t> idx(perm.data() + start, nb);
      std::vector<int> yb(nb);
      for (std::size_t i = 0; i < nb; ++i) yb[i] = data.labels[idx[i]];

      BatchForward fwd = forward_batch(st, data, idx);
      const LossOutput ce = cross_entropy(fwd.logits, yb);
      if (!std::isfinite(ce.value)) {
        throw NumericError("fit_ce_only: non-finite loss at epoch " + std::to_string(epoch));
      }
      ce_sum += ce.value * static_cast<double>(nb);

      const HeadBackward hb = backward_head(st.head, fwd.U, ce.grad_embeddings);
      EncoderGrads eg = EncoderGrads::zeros_like(st.encoder);
      for (std::size_t i = 0; i < nb; ++i) {
        eg.accumulate(encoder_backward(st.encoder, fwd.tapes[i], {}, hb.dU.row(i)));
      }
      step_encoder_and_head(st, eg, hb, opts);
    }
    result.history.records.push_back(
        {epoch, ce_sum / static_cast<double>(n), 0.0, ce_sum / static_cast<double>(n)});
    if (on_epoch) on_epoch(epoch, st);
  }
  return result;
}

Matrix encode_dataset(const MlpEncoder& enc, const Dataset& data) {
  Matrix Z(data.size(), enc.output_dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ForwardTape tape = encoder_forward(enc, data.features.row(i));
    for (std::size_t c = 0; c < Z.cols(); ++c) Z(i, c) = tape.z[c];
  }
  return Z;
}

}  // namespace bregman
