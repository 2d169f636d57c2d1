#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bregman/adam.hpp"
#include "bregman/datasets.hpp"
#include "bregman/encoder.hpp"
#include "bregman/losses.hpp"

namespace bregman {

struct TrainConfig {
  double gamma = 1.0;         // divergence loss weight (paper's best setting)
  std::size_t m = 32;         // Softplus units in phi
  double eps_quad = 1e-3;
  bool eps_trainable = false;
  double lr = 1e-4;
  double weight_decay = 1e-4;
  bool decoupled_weight_decay = false;
  std::size_t batch_size = 32;
  std::size_t epochs = 300;
  std::uint64_t seed = 42;
  std::size_t knn_k = 15;
  bool clamp_hinge = false;
  bool normalize_divergence = true;
  std::vector<std::size_t> encoder_dims;  // full chain; empty -> {p, 64, 32, 8}

  void validate() const;
  std::vector<std::size_t> resolve_encoder_dims(std::size_t input_dim) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double ce_loss = 0.0;
  double div_loss = 0.0;
  double joint_loss = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> records;
};

/// Single affine classifier head on the pre-normalization embedding.
struct ClassifierHead {
  Matrix weight;  // C x d
  Vector bias;    // C
};

struct TrainerState {
  MlpEncoder encoder;
  ClassifierHead head;
  GnmPhi phi;

  std::vector<AdamState> adam_enc_w;
  std::vector<AdamState> adam_enc_b;
  std::vector<AdamState> adam_head;  // weight, bias
  std::vector<AdamState> adam_phi;   // beta, bias, (eps when trainable)
  double eps_floor = 0.0;

  /// Flat copy of every parameter block, in canonical order.
  Vector parameter_snapshot() const;
};

/// S(i) = same-label indices, K(i) = different-label indices of the batch.
PairSets build_pair_sets(std::span<const int> labels);

TrainerState make_trainer_state(const Dataset& data, const TrainConfig& cfg);

/// One pass over shuffled batches: encode, CE on the head logits, divergence
/// loss on the unit-norm embeddings, joint backward, one Adam step per
/// parameter block. Losses are recorded before the updates.
EpochRecord train_epoch(TrainerState& state, const Dataset& data, const TrainConfig& cfg,
                        RngStream& shuffle_rng, std::size_t epoch_index);

using EpochCallback = std::function<void(std::size_t epoch, const TrainerState& state)>;

struct FitResult {
  TrainerState state;
  TrainHistory history;
};

FitResult fit(const Dataset& data, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Reference trainer with no divergence branch at all (cross-entropy only).
/// With the same seed its parameter trajectory is bit-identical to
/// fit(gamma = 0); the gamma sweep's 0.0 row is this baseline.
FitResult fit_ce_only(const Dataset& data, const TrainConfig& cfg,
                      const EpochCallback& on_epoch = {});

/// Encode every dataset row with a trained encoder; rows of the result are
/// the unit-norm embeddings z.
Matrix encode_dataset(const MlpEncoder& enc, const Dataset& data);

}  // namespace bregman
