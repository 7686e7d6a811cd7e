#include "har/models.hpp"

#include <algorithm>
#include <random>

#include "har/errors.hpp"
#include "har/nn/loss.hpp"

namespace har {
namespace {

using nn::LayerKind;
using nn::LayerSpec;
using nn::Shape;
using nn::Tensor;

std::vector<LayerSpec> conv1d_stack(std::size_t in_channels, const ModelConfig& c) {
  std::vector<LayerSpec> specs;
  std::size_t in = in_channels;
  for (auto width : c.conv1d_channels) {
    specs.push_back({LayerKind::Conv1D, in, width, c.conv1d_kernel, 1, c.conv1d_kernel / 2});
    specs.push_back({LayerKind::ReLU});
    specs.push_back({LayerKind::MaxPool1D, 0, 0, c.pool, c.pool, 0});
    in = width;
  }
  specs.push_back({LayerKind::Flatten});
  return specs;
}

std::vector<LayerSpec> conv2d_stack(const ModelConfig& c) {
  std::vector<LayerSpec> specs;
  std::size_t in = c.window;
  for (auto width : c.conv2d_channels) {
    specs.push_back({LayerKind::Conv2D, in, width, c.conv2d_kernel, 1, c.conv2d_kernel / 2});
    specs.push_back({LayerKind::ReLU});
    specs.push_back({LayerKind::MaxPool2D, 0, 0, c.pool, c.pool, 0});
    in = width;
  }
  specs.push_back({LayerKind::Flatten});
  return specs;
}

void init_all(nn::Sequential& seq, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < seq.size(); ++i) nn::he_uniform_init(seq.layer(i), rng);
}

}  // namespace

std::string_view method_name(FusionMethod method) {
  return method == FusionMethod::DataFusion ? "data-fusion" : "feature-fusion";
}

FusionMethod parse_method(std::string_view name) {
  if (name == "data-fusion") return FusionMethod::DataFusion;
  if (name == "feature-fusion") return FusionMethod::FeatureFusion;
  fail(ErrorKind::Domain, "unknown fusion method '" + std::string(name) + "'");
}

void validate_model_config(const ModelConfig& c) {
  if (c.method == FusionMethod::FeatureFusion && c.subset != Subset::All &&
      c.subset != Subset::ThermalOnly)
    fail(ErrorKind::Domain, "feature fusion is defined for ALL and THERMAL_ONLY only, not " +
                                std::string(subset_name(c.subset)));
  if (c.window == 0 || c.conv1d_channels.empty() || c.conv1d_kernel == 0 || c.pool == 0 ||
      c.hidden == 0)
    fail(ErrorKind::Domain, "model widths and kernels must be positive");
  if (c.method == FusionMethod::FeatureFusion &&
      (c.conv2d_channels.empty() || c.conv2d_kernel == 0 || c.thermal_features == 0))
    fail(ErrorKind::Domain, "thermal branch widths must be positive");
}

FusionModel::FusionModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  validate_model_config(config_);
  build(seed);
}

void FusionModel::build(std::uint64_t seed) {
  const auto& c = config_;
  const std::size_t channels = input_channels();
  std::vector<LayerSpec> head;

  if (c.method == FusionMethod::DataFusion) {
    branch_a_.emplace(conv1d_stack(channels, c));
    features_a_ = branch_a_->output_shape({channels, c.window}).at(0);
  } else {
    if (c.subset == Subset::All) {
      branch_a_.emplace(conv1d_stack(kNonThermalCount, c));
      features_a_ = branch_a_->output_shape({kNonThermalCount, c.window}).at(0);
      thermal_offset_ = kThermalOffset;
    }
    auto specs = conv2d_stack(c);
    const std::size_t flat =
        nn::Sequential(specs).output_shape({c.window, kThermalRows, kThermalCols}).at(0);
    specs.push_back({LayerKind::Dense, flat, c.thermal_features});
    specs.push_back({LayerKind::ReLU});
    branch_b_.emplace(specs);
    features_b_ = c.thermal_features;
    if (branch_a_ && (features_a_ > 2 * features_b_ || features_b_ > 2 * features_a_))
      fail(ErrorKind::Domain, "feature-fusion branches must stay within a factor of 2 (" +
                                  std::to_string(features_a_) + " vs " +
                                  std::to_string(features_b_) + ")");
  }
  head.push_back({LayerKind::Dense, features_a_ + features_b_, c.hidden});
  head.push_back({LayerKind::ReLU});
  head.push_back({LayerKind::Dense, c.hidden, static_cast<std::size_t>(kActivityCount)});
  head_ = nn::Sequential(head);

  std::mt19937_64 rng(seed);
  if (branch_a_) {
    branch_a_->layer(0).set_input_grad(false);
    init_all(*branch_a_, rng);
  }
  if (branch_b_) {
    branch_b_->layer(0).set_input_grad(false);
    init_all(*branch_b_, rng);
  }
  init_all(head_, rng);
}

std::size_t FusionModel::input_channels() const {
  return canonical_layout().subset(config_.subset).count();
}

Tensor FusionModel::forward(const Tensor& windows) {
  const std::size_t channels = input_channels();
  if (windows.rank() != 3 || windows.dim(1) != config_.window || windows.dim(2) != channels)
    fail(ErrorKind::Shape, "model expects windows [B x " + std::to_string(config_.window) + " x " +
                               std::to_string(channels) + "], got " +
                               nn::shape_string(windows.shape()));
  const std::size_t batch = windows.dim(0), frames = config_.window;
  const std::size_t per_window = frames * channels;

  Tensor fa, fb;
  if (branch_a_) {
    const std::size_t width = config_.method == FusionMethod::DataFusion ? channels : kNonThermalCount;
    Tensor x({batch, width, frames});
    for (std::size_t b = 0; b < batch; ++b) {
      const double* src = windows.data() + b * per_window;
      double* dst = x.data() + b * width * frames;
      for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t ch = 0; ch < width; ++ch) dst[ch * frames + t] = src[t * channels + ch];
    }
    fa = branch_a_->forward(x);
  }
  if (branch_b_) {
    Tensor x({batch, frames, kThermalRows, kThermalCols});
    for (std::size_t b = 0; b < batch; ++b) {
      const double* src = windows.data() + b * per_window;
      double* dst = x.data() + b * frames * kThermalCount;
      for (std::size_t t = 0; t < frames; ++t)
        std::copy_n(src + t * channels + thermal_offset_, kThermalCount, dst + t * kThermalCount);
    }
    fb = branch_b_->forward(x);
  }

  if (branch_a_ && branch_b_) return head_.forward(concat_.forward(fa, fb));
  return head_.forward(branch_a_ ? fa : fb);
}

void FusionModel::backward(const Tensor& grad_logits) {
  Tensor g = head_.backward(grad_logits);
  if (branch_a_ && branch_b_) {
    auto [ga, gb] = concat_.backward(g);
    branch_a_->backward(ga);
    branch_b_->backward(gb);
  } else if (branch_a_) {
    branch_a_->backward(g);
  } else {
    branch_b_->backward(g);
  }
}

std::vector<nn::Parameter*> FusionModel::parameters() {
  std::vector<nn::Parameter*> out;
  if (branch_a_)
    for (auto* p : branch_a_->parameters()) out.push_back(p);
  if (branch_b_)
    for (auto* p : branch_b_->parameters()) out.push_back(p);
  for (auto* p : head_.parameters()) out.push_back(p);
  return out;
}

std::vector<std::string> FusionModel::parameter_names() {
  std::vector<std::string> names;
  auto add = [&](const char* stage, nn::Sequential& seq) {
    for (std::size_t i = 0; i < seq.size(); ++i)
      for (auto* p : seq.layer(i).parameters())
        names.push_back(std::string(stage) + "." + std::to_string(i) + "." + p->name);
  };
  if (branch_a_) add("branch_a", *branch_a_);
  if (branch_b_) add("branch_b", *branch_b_);
  add("head", head_);
  return names;
}

void FusionModel::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

std::vector<std::pair<std::string, std::vector<nn::LayerSpec>>> FusionModel::topology() const {
  std::vector<std::pair<std::string, std::vector<nn::LayerSpec>>> out;
  if (branch_a_) out.emplace_back("branch_a", branch_a_->specs());
  if (branch_b_) out.emplace_back("branch_b", branch_b_->specs());
  out.emplace_back("head", head_.specs());
  return out;
}

FusionModel build_data_fusion(Subset subset, std::uint64_t seed) {
  ModelConfig c;
  c.method = FusionMethod::DataFusion;
  c.subset = subset;
  return FusionModel(c, seed);
}

FusionModel build_feature_fusion(Subset subset, std::uint64_t seed) {
  ModelConfig c;
  c.method = FusionMethod::FeatureFusion;
  c.subset = subset;
  return FusionModel(c, seed);
}

int argmax_label(std::span<const double> probabilities) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < probabilities.size(); ++k)
    if (probabilities[k] > probabilities[best]) best = k;
  return static_cast<int>(best) + 1;
}

std::vector<Prediction> predict_batch(FusionModel& model, const Tensor& windows) {
  const Tensor logits = model.forward(windows);
  const std::size_t classes = logits.dim(1);
  std::vector<Prediction> out;
  out.reserve(logits.dim(0));
  for (std::size_t b = 0; b < logits.dim(0); ++b) {
    auto p = nn::softmax(logits.values().subspan(b * classes, classes));
    const int label = argmax_label(p);
    out.push_back({label, std::move(p)});
  }
  return out;
}

Prediction predict(FusionModel& model, std::span<const double> window) {
  const std::size_t channels = model.input_channels();
  const std::size_t frames = model.config().window;
  if (window.size() != channels * frames)
    fail(ErrorKind::Shape, "window has " + std::to_string(window.size()) + " values, model expects " +
                               std::to_string(frames) + " x " + std::to_string(channels));
  Tensor batch({1, frames, channels}, std::vector<double>(window.begin(), window.end()));
  return std::move(predict_batch(model, batch).front());
}

Tensor channels_first(std::span<const double> window, std::size_t frames, std::size_t channels,
                      std::size_t first, std::size_t count) {
  if (window.size() != frames * channels || first + count > channels)
    fail(ErrorKind::Shape, "channel range outside window");
  Tensor out({count, frames});
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t c = 0; c < count; ++c) out[c * frames + t] = window[t * channels + first + c];
  return out;
}

Tensor thermal_image(std::span<const double> window, std::size_t frames, std::size_t channels,
                     std::size_t offset) {
  if (window.size() != frames * channels || offset + kThermalCount > channels)
    fail(ErrorKind::Shape, "thermal block outside window");
  Tensor out({frames, kThermalRows, kThermalCols});
  for (std::size_t t = 0; t < frames; ++t)
    std::copy_n(window.data() + t * channels + offset, kThermalCount,
                out.data() + t * kThermalCount);
  return out;
}

}  // namespace har
