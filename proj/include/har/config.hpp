#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "har/evaluation.hpp"
#include "har/models.hpp"
#include "har/training.hpp"

namespace har {

/// Everything a CLI run depends on. Serialized as `key = value` lines; '#'
/// starts a comment. `out` is accepted but not written back, so reruns into
/// different directories produce identical files.
struct RunConfig {
  std::string corpus = "corpus";
  std::string dataset = "dataset.hards";
  std::string checkpoint = "model.ckpt";
  std::string out = "run";

  double frame_rate_hz = 6.0;
  std::size_t window_size = 20;
  std::size_t window_step = 10;
  Subset subset = Subset::All;
  FusionMethod method = FusionMethod::DataFusion;

  std::size_t hidden = 128;
  std::size_t thermal_features = 128;

  std::size_t epochs = TrainingConfig{}.epochs;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 7;
  std::size_t jobs = 1;
  FoldUnit fold_unit = FoldUnit::Session;
  int holdout_session = 0;  // train: withhold this session; 0 trains on everything

  std::size_t subjects = 10;
  std::size_t sessions = 5;
  double noise_scale = 1.0;
  double hot_drink_peak_c = 52.0;

  /// Sets one key from its text value. Throws ErrorKind::Config.
  void set(std::string_view key, std::string_view value);
  std::string to_text() const;
  /// Cross-key checks. Throws ErrorKind::Config.
  void validate() const;

  ModelConfig model() const;
  TrainingConfig training() const;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Writes `to_text()` to <dir>/config.txt.
void write_resolved_config(const RunConfig& config, const std::filesystem::path& dir);

}  // namespace har
