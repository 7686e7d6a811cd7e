#include "har/nn/layers.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "har/errors.hpp"
#include "har/nn/gemm.hpp"
#include "har/nn/ops.hpp"

namespace har::nn {
namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* layer) {
  if (t.rank() != rank)
    fail(ErrorKind::Shape, std::string(layer) + " expects a rank-" + std::to_string(rank) +
                               " batch, got " + shape_string(t.shape()));
}

// [B x C x S] <-> [C x (B*S)]
void batch_to_channel_major(const double* src, std::size_t batch, std::size_t channels,
                            std::size_t spatial, double* dst) {
  const std::size_t n = batch * spatial;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < channels; ++c) {
      const double* s = src + (b * channels + c) * spatial;
      std::copy(s, s + spatial, dst + c * n + b * spatial);
    }
}

class Conv1dLayer final : public Layer {
 public:
  explicit Conv1dLayer(const LayerSpec& spec)
      : Layer(spec),
        weight_("weight", {spec.out, spec.in, spec.kernel}),
        bias_("bias", {spec.out}) {}

  Tensor forward(const Tensor& input) override {
    require_rank(input, 3, "conv1d");
    geom_ = detail::conv1d_geometry(input.shape(), weight_.value.shape());
    geom_.stride = spec_.stride;
    geom_.padding = spec_.padding;
    geom_.out_length = conv_output_length(geom_.length, geom_.kernel, geom_.stride, geom_.padding);
    cols_.resize(geom_.in_channels * geom_.kernel * geom_.batch * geom_.out_length);
    detail::im2col_1d(geom_, input.data(), cols_.data());
    Tensor out({geom_.batch, geom_.out_channels, geom_.out_length});
    detail::conv_gemm_forward(geom_.batch, geom_.out_channels, geom_.out_length,
                              geom_.in_channels * geom_.kernel, weight_.value.data(),
                              bias_.value.data(), cols_.data(), out.data());
    return out;
  }

  Tensor backward(const Tensor& grad_output) override {
    const std::size_t n = geom_.batch * geom_.out_length;
    const std::size_t rows = geom_.in_channels * geom_.kernel;
    std::vector<double> g(geom_.out_channels * n);
    batch_to_channel_major(grad_output.data(), geom_.batch, geom_.out_channels, geom_.out_length,
                           g.data());
    const auto gm = const_matrix(g.data(), geom_.out_channels, n);
    gemm(1.0, gm, const_matrix(cols_.data(), rows, n).t(), 1.0,
         matrix(weight_.grad.data(), geom_.out_channels, rows));
    for (std::size_t c = 0; c < geom_.out_channels; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += g[c * n + j];
      bias_.grad[c] += s;
    }
    if (!input_grad_) return {};
    std::vector<double> dcols(rows * n);
    gemm(1.0, const_matrix(weight_.value.data(), geom_.out_channels, rows).t(), gm, 0.0,
         matrix(dcols.data(), rows, n));
    Tensor dx({geom_.batch, geom_.in_channels, geom_.length});
    detail::col2im_1d(geom_, dcols.data(), dx.data());
    return dx;
  }

  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

 private:
  Parameter weight_, bias_;
  detail::Conv1dGeometry geom_{};
  std::vector<double> cols_;
};

class Conv2dLayer final : public Layer {
 public:
  explicit Conv2dLayer(const LayerSpec& spec)
      : Layer(spec),
        weight_("weight", {spec.out, spec.in, spec.kernel, spec.kernel}),
        bias_("bias", {spec.out}) {}

  Tensor forward(const Tensor& input) override {
    require_rank(input, 4, "conv2d");
    geom_ = detail::conv2d_geometry(input.shape(), weight_.value.shape());
    geom_.stride = spec_.stride;
    geom_.padding = spec_.padding;
    geom_.out_height = conv_output_length(geom_.height, geom_.kernel_h, geom_.stride, geom_.padding);
    geom_.out_width = conv_output_length(geom_.width, geom_.kernel_w, geom_.stride, geom_.padding);
    const std::size_t spatial = geom_.out_height * geom_.out_width;
    cols_.resize(col_rows() * geom_.batch * spatial);
    detail::im2col_2d(geom_, input.data(), cols_.data());
    Tensor out({geom_.batch, geom_.out_channels, geom_.out_height, geom_.out_width});
    detail::conv_gemm_forward(geom_.batch, geom_.out_channels, spatial, col_rows(),
                              weight_.value.data(), bias_.value.data(), cols_.data(), out.data());
    return out;
  }

  Tensor backward(const Tensor& grad_output) override {
    const std::size_t spatial = geom_.out_height * geom_.out_width;
    const std::size_t n = geom_.batch * spatial;
    std::vector<double> g(geom_.out_channels * n);
    batch_to_channel_major(grad_output.data(), geom_.batch, geom_.out_channels, spatial, g.data());
    const auto gm = const_matrix(g.data(), geom_.out_channels, n);
    gemm(1.0, gm, const_matrix(cols_.data(), col_rows(), n).t(), 1.0,
         matrix(weight_.grad.data(), geom_.out_channels, col_rows()));
    for (std::size_t c = 0; c < geom_.out_channels; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += g[c * n + j];
      bias_.grad[c] += s;
    }
    if (!input_grad_) return {};
    std::vector<double> dcols(col_rows() * n);
    gemm(1.0, const_matrix(weight_.value.data(), geom_.out_channels, col_rows()).t(), gm, 0.0,
         matrix(dcols.data(), col_rows(), n));
    Tensor dx({geom_.batch, geom_.in_channels, geom_.height, geom_.width});
    detail::col2im_2d(geom_, dcols.data(), dx.data());
    return dx;
  }

  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

 private:
  std::size_t col_rows() const { return geom_.in_channels * geom_.kernel_h * geom_.kernel_w; }

  Parameter weight_, bias_;
  detail::Conv2dGeometry geom_{};
  std::vector<double> cols_;
};

class MaxPoolLayer final : public Layer {
 public:
  explicit MaxPoolLayer(const LayerSpec& spec) : Layer(spec) {}

  Tensor forward(const Tensor& input) override {
    const bool two_d = spec_.kind == LayerKind::MaxPool2D;
    require_rank(input, two_d ? 4 : 3, two_d ? "maxpool2d" : "maxpool1d");
    input_shape_ = input.shape();
    auto r = two_d ? maxpool2d_forward(input, spec_.kernel, spec_.stride)
                   : maxpool1d_forward(input, spec_.kernel, spec_.stride);
    argmax_ = std::move(r.argmax);
    return std::move(r.output);
  }

  Tensor backward(const Tensor& grad_output) override {
    if (!input_grad_) return {};
    return maxpool_backward(grad_output, argmax_, input_shape_);
  }

 private:
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

class DenseLayer final : public Layer {
 public:
  explicit DenseLayer(const LayerSpec& spec)
      : Layer(spec), weight_("weight", {spec.out, spec.in}), bias_("bias", {spec.out}) {}

  Tensor forward(const Tensor& input) override {
    require_rank(input, 2, "dense");
    input_ = input;
    return dense_forward(input, weight_.value, bias_.value);
  }

  Tensor backward(const Tensor& grad_output) override {
    const std::size_t batch = input_.dim(0), din = spec_.in, dout = spec_.out;
    const auto g = const_matrix(grad_output.data(), batch, dout);
    gemm(1.0, g.t(), const_matrix(input_.data(), batch, din), 1.0,
         matrix(weight_.grad.data(), dout, din));
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t o = 0; o < dout; ++o) bias_.grad[o] += grad_output[b * dout + o];
    if (!input_grad_) return {};
    Tensor dx({batch, din});
    gemm(1.0, g, const_matrix(weight_.value.data(), dout, din), 0.0, matrix(dx.data(), batch, din));
    return dx;
  }

  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

 private:
  Parameter weight_, bias_;
  Tensor input_;
};

class ReluLayer final : public Layer {
 public:
  explicit ReluLayer(const LayerSpec& spec) : Layer(spec) {}

  Tensor forward(const Tensor& input) override {
    Tensor out = input;
    active_.assign(input.size(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i] > 0.0)
        active_[i] = 1;
      else
        out[i] = 0.0;
    }
    return out;
  }

  Tensor backward(const Tensor& grad_output) override {
    if (!input_grad_) return {};
    Tensor dx = grad_output;
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (!active_[i]) dx[i] = 0.0;
    return dx;
  }

 private:
  std::vector<unsigned char> active_;
};

class FlattenLayer final : public Layer {
 public:
  explicit FlattenLayer(const LayerSpec& spec) : Layer(spec) {}

  Tensor forward(const Tensor& input) override {
    if (input.rank() < 2) fail(ErrorKind::Shape, "flatten expects a batch");
    input_shape_ = input.shape();
    return input.reshaped({input.dim(0), input.size() / input.dim(0)});
  }

  Tensor backward(const Tensor& grad_output) override {
    if (!input_grad_) return {};
    return grad_output.reshaped(input_shape_);
  }

 private:
  Shape input_shape_;
};

std::size_t parse_size(std::string_view s) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    fail(ErrorKind::Parse, "bad layer hyperparameter '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv1D: return "conv1d";
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::MaxPool1D: return "maxpool1d";
    case LayerKind::MaxPool2D: return "maxpool2d";
    case LayerKind::Dense: return "dense";
    case LayerKind::ReLU: return "relu";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Concat: return "concat";
    case LayerKind::SoftmaxCrossEntropy: return "softmax_xent";
  }
  return "?";
}

Shape LayerSpec::output_shape(const Shape& input) const {
  auto need_rank = [&](std::size_t r) {
    if (input.size() != r)
      fail(ErrorKind::Shape, std::string(layer_kind_name(kind)) + " cannot take input " +
                                 shape_string(input));
  };
  switch (kind) {
    case LayerKind::Conv1D:
      need_rank(2);
      if (input[0] != in) fail(ErrorKind::Shape, "conv1d channel mismatch");
      return {out, conv_output_length(input[1], kernel, stride, padding)};
    case LayerKind::Conv2D:
      need_rank(3);
      if (input[0] != in) fail(ErrorKind::Shape, "conv2d channel mismatch");
      return {out, conv_output_length(input[1], kernel, stride, padding),
              conv_output_length(input[2], kernel, stride, padding)};
    case LayerKind::MaxPool1D:
      need_rank(2);
      return {input[0], pool_output_length(input[1], kernel, stride)};
    case LayerKind::MaxPool2D:
      need_rank(3);
      return {input[0], pool_output_length(input[1], kernel, stride),
              pool_output_length(input[2], kernel, stride)};
    case LayerKind::Dense:
      need_rank(1);
      if (input[0] != in) fail(ErrorKind::Shape, "dense feature mismatch");
      return {out};
    case LayerKind::ReLU:
    case LayerKind::SoftmaxCrossEntropy:
      return input;
    case LayerKind::Flatten:
      return {shape_size(input)};
    case LayerKind::Concat:
      fail(ErrorKind::Shape, "concat has two inputs; use Concat directly");
  }
  return input;
}

std::string LayerSpec::to_string() const {
  std::ostringstream os;
  os << layer_kind_name(kind);
  switch (kind) {
    case LayerKind::Conv1D:
    case LayerKind::Conv2D:
      os << " in=" << in << " out=" << out << " kernel=" << kernel << " stride=" << stride
         << " padding=" << padding;
      break;
    case LayerKind::MaxPool1D:
    case LayerKind::MaxPool2D:
      os << " kernel=" << kernel << " stride=" << stride;
      break;
    case LayerKind::Dense:
      os << " in=" << in << " out=" << out;
      break;
    default:
      break;
  }
  return os.str();
}

LayerSpec LayerSpec::parse(std::string_view text) {
  LayerSpec spec;
  const auto sp = text.find(' ');
  const auto name = text.substr(0, sp);
  bool found = false;
  for (auto k : {LayerKind::Conv1D, LayerKind::Conv2D, LayerKind::MaxPool1D, LayerKind::MaxPool2D,
                 LayerKind::Dense, LayerKind::ReLU, LayerKind::Flatten, LayerKind::Concat,
                 LayerKind::SoftmaxCrossEntropy}) {
    if (layer_kind_name(k) == name) {
      spec.kind = k;
      found = true;
    }
  }
  if (!found) fail(ErrorKind::Parse, "unknown layer kind '" + std::string(name) + "'");
  text = sp == std::string_view::npos ? std::string_view{} : text.substr(sp + 1);
  while (!text.empty()) {
    const auto next = text.find(' ');
    const auto tok = text.substr(0, next);
    text = next == std::string_view::npos ? std::string_view{} : text.substr(next + 1);
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) fail(ErrorKind::Parse, "bad layer token '" + std::string(tok) + "'");
    const auto key = tok.substr(0, eq);
    const auto value = parse_size(tok.substr(eq + 1));
    if (key == "in") spec.in = value;
    else if (key == "out") spec.out = value;
    else if (key == "kernel") spec.kernel = value;
    else if (key == "stride") spec.stride = value;
    else if (key == "padding") spec.padding = value;
    else fail(ErrorKind::Parse, "unknown layer key '" + std::string(key) + "'");
  }
  return spec;
}

std::unique_ptr<Layer> make_layer(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Conv1D: return std::make_unique<Conv1dLayer>(spec);
    case LayerKind::Conv2D: return std::make_unique<Conv2dLayer>(spec);
    case LayerKind::MaxPool1D:
    case LayerKind::MaxPool2D: return std::make_unique<MaxPoolLayer>(spec);
    case LayerKind::Dense: return std::make_unique<DenseLayer>(spec);
    case LayerKind::ReLU: return std::make_unique<ReluLayer>(spec);
    case LayerKind::Flatten: return std::make_unique<FlattenLayer>(spec);
    case LayerKind::Concat:
    case LayerKind::SoftmaxCrossEntropy: break;
  }
  fail(ErrorKind::Domain, std::string(layer_kind_name(spec.kind)) + " is not a sequential layer");
}

void he_uniform_init(Layer& layer, std::mt19937_64& rng) {
  const auto& s = layer.spec();
  std::size_t fan_in = 0;
  switch (s.kind) {
    case LayerKind::Conv1D: fan_in = s.in * s.kernel; break;
    case LayerKind::Conv2D: fan_in = s.in * s.kernel * s.kernel; break;
    case LayerKind::Dense: fan_in = s.in; break;
    default: return;
  }
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  auto params = layer.parameters();
  for (double& w : params.at(0)->value.values()) w = dist(rng);
  params.at(1)->value.fill(0.0);
}

Sequential::Sequential(const std::vector<LayerSpec>& specs) {
  for (const auto& s : specs) add(make_layer(s));
}

void Sequential::add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

Tensor Sequential::forward(const Tensor& input) {
  Tensor x = input;
  for (auto& l : layers_) x = l->forward(x);
  return x;
}

Tensor Sequential::backward(const Tensor& grad_output) {
  Tensor g = grad_output;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
    if (g.empty()) break;
  }
  return g;
}

std::vector<Parameter*> Sequential::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_)
    for (auto* p : l->parameters()) out.push_back(p);
  return out;
}

std::vector<LayerSpec> Sequential::specs() const {
  std::vector<LayerSpec> out;
  for (const auto& l : layers_) out.push_back(l->spec());
  return out;
}

Shape Sequential::output_shape(Shape input) const {
  for (const auto& l : layers_) input = l->spec().output_shape(input);
  return input;
}

Tensor Concat::forward(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0))
    fail(ErrorKind::Shape, "concat expects two [B x D] batches of equal B");
  batch_ = a.dim(0);
  width_a_ = a.dim(1);
  width_b_ = b.dim(1);
  Tensor out({batch_, width_a_ + width_b_});
  for (std::size_t i = 0; i < batch_; ++i) {
    std::copy_n(a.data() + i * width_a_, width_a_, out.data() + i * (width_a_ + width_b_));
    std::copy_n(b.data() + i * width_b_, width_b_,
                out.data() + i * (width_a_ + width_b_) + width_a_);
  }
  return out;
}

std::pair<Tensor, Tensor> Concat::backward(const Tensor& grad_output) const {
  Tensor ga({batch_, width_a_}), gb({batch_, width_b_});
  for (std::size_t i = 0; i < batch_; ++i) {
    const double* src = grad_output.data() + i * (width_a_ + width_b_);
    std::copy_n(src, width_a_, ga.data() + i * width_a_);
    std::copy_n(src + width_a_, width_b_, gb.data() + i * width_b_);
  }
  return {std::move(ga), std::move(gb)};
}

}  // namespace har::nn
