#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "har/nn/layers.hpp"
#include "har/nn/tensor.hpp"
#include "har/sensor_domain.hpp"

namespace har {

enum class FusionMethod { DataFusion, FeatureFusion };

/// "data-fusion" / "feature-fusion".
std::string_view method_name(FusionMethod method);
FusionMethod parse_method(std::string_view name);

/// Widths and kernel sizes of both topologies.
struct ModelConfig {
  FusionMethod method = FusionMethod::DataFusion;
  Subset subset = Subset::All;
  std::size_t window = 20;
  std::vector<std::size_t> conv1d_channels = {64, 64, 64};
  std::size_t conv1d_kernel = 5;
  std::size_t pool = 2;
  std::size_t hidden = 128;
  std::vector<std::size_t> conv2d_channels = {16, 32, 32};
  std::size_t conv2d_kernel = 3;
  std::size_t thermal_features = 128;

  bool operator==(const ModelConfig&) const = default;
};

struct Prediction {
  int label;  // 1..14
  std::vector<double> probabilities;
};

/// Either multi-channel CNN variant.
///
/// Input is a batch of windows [B x T x C], time-major as stored in a
/// WindowedDataset, already normalized and restricted to the model's subset.
///
/// Data fusion runs one 1D stack over all C channels. Feature fusion runs the
/// 1D stack over the 23 non-thermal channels (branch A) and a 2D stack over
/// the thermal image with the T frames as input channels (branch B), then
/// concatenates both feature vectors. Under THERMAL_ONLY, feature fusion has
/// branch B alone.
class FusionModel {
 public:
  /// Builds the topology with He-uniform weights drawn from `seed`.
  FusionModel(const ModelConfig& config, std::uint64_t seed);

  FusionModel(FusionModel&&) noexcept = default;
  FusionModel& operator=(FusionModel&&) noexcept = default;

  const ModelConfig& config() const { return config_; }
  std::size_t input_channels() const;

  nn::Tensor forward(const nn::Tensor& windows);
  /// Accumulates parameter gradients from d(loss)/d(logits).
  void backward(const nn::Tensor& grad_logits);

  std::vector<nn::Parameter*> parameters();
  /// Parameter names in declaration order, e.g. "branch_a.0.weight".
  std::vector<std::string> parameter_names();
  void zero_grad();

  /// Layer specs of each present stage, in order: branch_a, branch_b, head.
  std::vector<std::pair<std::string, std::vector<nn::LayerSpec>>> topology() const;

  /// Feature vector lengths entering the head (0 when a branch is absent).
  std::size_t branch_a_features() const { return features_a_; }
  std::size_t branch_b_features() const { return features_b_; }

 private:
  void build(std::uint64_t seed);

  ModelConfig config_;
  std::optional<nn::Sequential> branch_a_;
  std::optional<nn::Sequential> branch_b_;
  nn::Sequential head_;
  nn::Concat concat_;
  std::size_t features_a_ = 0;
  std::size_t features_b_ = 0;
  std::size_t thermal_offset_ = 0;
};

/// Default data-fusion model for the given subset.
FusionModel build_data_fusion(Subset subset, std::uint64_t seed = 0);
/// Default feature-fusion model; defined for ALL and THERMAL_ONLY.
FusionModel build_feature_fusion(Subset subset = Subset::All, std::uint64_t seed = 0);

/// Throws ErrorKind::Domain for combinations the topologies do not define.
void validate_model_config(const ModelConfig& config);

/// Argmax label (ties to the lowest id) and probabilities for one window
/// of shape [T x C].
Prediction predict(FusionModel& model, std::span<const double> window);
/// Same for every window of a [B x T x C] batch.
std::vector<Prediction> predict_batch(FusionModel& model, const nn::Tensor& windows);
/// Argmax over probabilities, ties to the lowest label.
int argmax_label(std::span<const double> probabilities);

/// [T x C] window -> [C x T] channels-first series for the 1D stack.
nn::Tensor channels_first(std::span<const double> window, std::size_t frames,
                          std::size_t channels, std::size_t first, std::size_t count);
/// [T x C] window -> [T x 24 x 32] thermal image stack starting at channel `offset`.
nn::Tensor thermal_image(std::span<const double> window, std::size_t frames, std::size_t channels,
                         std::size_t offset);

}  // namespace har
