#pragma once

#include <cstdint>
#include <filesystem>

#include "bregman/encoder.hpp"
#include "bregman/phi.hpp"
#include "bregman/trainer.hpp"

namespace bregman {

/// Trained model bundle as stored on disk.
struct LoadedModel {
  MlpEncoder encoder;
  ClassifierHead head;
  GnmPhi phi;
  std::uint64_t seed = 0;
};

/// Binary model file, all integers and doubles little-endian:
///   magic "BREGMODL", u32 version,
///   u32 layer count, (u32 out, u32 in) per encoder layer,
///   u32 class_count, u32 m, u32 d, f64 eps_quad, u64 seed,
///   payload: f64 per parameter, in declared order
///   (encoder weight+bias per layer, head weight+bias, phi beta, phi bias).
/// save -> load -> save round-trips byte-identically.
void save_model(const std::filesystem::path& path, const MlpEncoder& encoder,
                const ClassifierHead& head, const GnmPhi& phi, std::uint64_t seed);

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace bregman
