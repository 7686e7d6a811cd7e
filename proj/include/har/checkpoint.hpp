#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "har/models.hpp"
#include "har/windowing.hpp"

namespace har {

/// Everything besides the weights needed to reuse a trained model.
struct CheckpointMeta {
  std::uint64_t seed = 0;
  /// Session withheld from training, if any.
  std::optional<int> holdout_session;
  /// Normalization fitted on the training windows, over the model's input channels.
  NormalizationStats stats;
};

struct Checkpoint {
  FusionModel model;
  CheckpointMeta meta;
};

/// Text header (magic line, hyperparameters, topology, parameter shapes,
/// normalization) terminated by a line "end", followed by the parameters as
/// little-endian 32-bit floats in declaration order.
void save_checkpoint(const std::filesystem::path& path, FusionModel& model,
                     const CheckpointMeta& meta);
std::string serialize_checkpoint(FusionModel& model, const CheckpointMeta& meta);

Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint parse_checkpoint(std::string_view bytes, const std::string& source = "checkpoint");

}  // namespace har
