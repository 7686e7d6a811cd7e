#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "har/nn/tensor.hpp"

namespace har::nn {

enum class LayerKind {
  Conv1D,
  Conv2D,
  MaxPool1D,
  MaxPool2D,
  Dense,
  ReLU,
  Flatten,
  Concat,
  SoftmaxCrossEntropy,
};

std::string_view layer_kind_name(LayerKind kind);

/// Kind plus hyperparameters. For convolutions `in`/`out` are channel counts
/// and `kernel` the (square) kernel extent; for pooling `kernel` is the
/// window; for dense layers `in`/`out` are feature counts.
struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;

  /// Per-sample output shape (no batch axis); throws ErrorKind::Shape when
  /// the input does not fit.
  Shape output_shape(const Shape& input) const;

  /// e.g. "conv1d in=791 out=64 kernel=5 stride=1 padding=2"
  std::string to_string() const;
  static LayerSpec parse(std::string_view text);

  bool operator==(const LayerSpec&) const = default;
};

/// A differentiable stage operating on batch-first tensors.
///
/// `forward` caches whatever `backward` needs; `backward` accumulates into
/// parameter gradients and returns the gradient with respect to the input
/// (an empty tensor when input gradients are switched off).
class Layer {
 public:
  explicit Layer(LayerSpec spec) : spec_(spec) {}
  virtual ~Layer() = default;
  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  const LayerSpec& spec() const { return spec_; }
  virtual Tensor forward(const Tensor& input) = 0;
  virtual Tensor backward(const Tensor& grad_output) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }

  /// The first layer of a network has no use for its input gradient.
  void set_input_grad(bool enabled) { input_grad_ = enabled; }
  bool input_grad() const { return input_grad_; }

 protected:
  LayerSpec spec_;
  bool input_grad_ = true;
};

std::unique_ptr<Layer> make_layer(const LayerSpec& spec);

/// He-uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)) and zero biases.
void he_uniform_init(Layer& layer, std::mt19937_64& rng);

class Sequential {
 public:
  Sequential() = default;
  explicit Sequential(const std::vector<LayerSpec>& specs);

  void add(std::unique_ptr<Layer> layer);
  Tensor forward(const Tensor& input);
  Tensor backward(const Tensor& grad_output);
  std::vector<Parameter*> parameters();

  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }
  std::vector<LayerSpec> specs() const;
  Shape output_shape(Shape input) const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Joins two [B x Da] and [B x Db] feature batches into [B x (Da + Db)].
class Concat {
 public:
  Tensor forward(const Tensor& a, const Tensor& b);
  std::pair<Tensor, Tensor> backward(const Tensor& grad_output) const;

 private:
  std::size_t batch_ = 0, width_a_ = 0, width_b_ = 0;
};

}  // namespace har::nn
