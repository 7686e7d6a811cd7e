// Checks shared by the unit tests and the acceptance runner.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "har/models.hpp"
#include "har/nn/layers.hpp"
#include "har/nn/loss.hpp"
#include "har/nn/ops.hpp"
#include "oracles.hpp"

namespace checks {

using har::nn::LayerKind;
using har::nn::LayerSpec;
using har::nn::Tensor;

// Gradients below this magnitude count as zero when forming relative errors.
inline constexpr double kGradFloor = 1e-7;

inline double grad_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
}

struct GradCheck {
  std::size_t instances = 0;
  std::size_t coordinates = 0;
  std::size_t skipped = 0;  // next to a ReLU or max-pool kink
  double max_error = 0.0;
  std::string worst;

  void record(double analytic, double numeric, const std::string& where) {
    ++coordinates;
    const double e = grad_error(analytic, numeric);
    if (e > max_error) {
      max_error = e;
      std::ostringstream os;
      os << where << " analytic=" << analytic << " numeric=" << numeric;
      worst = os.str();
    }
  }
  void merge(const GradCheck& o) {
    instances += o.instances;
    coordinates += o.coordinates;
    skipped += o.skipped;
    if (o.max_error > max_error) {
      max_error = o.max_error;
      worst = o.worst;
    }
  }
};

inline Tensor random_tensor(oracle::Gen& gen, har::nn::Shape shape, double lo = -1.0, double hi = 1.0) {
  const auto n = har::nn::shape_size(shape);
  return Tensor(std::move(shape), gen.reals(n, lo, hi));
}

// Values whose pairwise gaps and distance from zero exceed 0.01 (ten FD
// steps), so max-pool and ReLU stay away from their kinks.
inline Tensor kink_free_tensor(oracle::Gen& gen, har::nn::Shape shape) {
  const auto n = har::nn::shape_size(shape);
  std::vector<double> v(n);
  std::iota(v.begin(), v.end(), 0.0);
  std::shuffle(v.begin(), v.end(), gen.rng);
  for (auto& x : v) x = (x - static_cast<double>(n) / 2.0 + 0.5) * 0.05 + gen.real(-0.01, 0.01);
  return Tensor(std::move(shape), std::move(v));
}

inline std::vector<double> vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

inline double weighted_sum(const Tensor& y, const Tensor& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

/// One random instance of `kind`: analytic input and parameter gradients of
/// sum(w * layer(x)) against central differences (h = 1e-3).
inline GradCheck check_layer_instance(LayerKind kind, oracle::Gen& gen) {
  GradCheck out;
  out.instances = 1;
  const std::size_t B = gen.size(1, 2);
  const std::string name(har::nn::layer_kind_name(kind));

  auto fd = [&](const std::function<double()>& loss, double& x, double analytic, const std::string& where) {
    const auto r = oracle::central_difference(loss, x);
    if (!r.smooth) {
      ++out.skipped;
      return;
    }
    out.record(analytic, r.derivative, where);
  };

  if (kind == LayerKind::Concat) {
    Tensor a = random_tensor(gen, {B, gen.size(1, 5)});
    Tensor b = random_tensor(gen, {B, gen.size(1, 5)});
    har::nn::Concat cat;
    const Tensor y = cat.forward(a, b);
    const Tensor w = random_tensor(gen, y.shape());
    auto [ga, gb] = cat.backward(w);
    auto loss = [&] { return weighted_sum(cat.forward(a, b), w); };
    for (std::size_t i = 0; i < a.size(); ++i) fd(loss, a[i], ga[i], "concat a");
    for (std::size_t i = 0; i < b.size(); ++i) fd(loss, b[i], gb[i], "concat b");
    return out;
  }

  if (kind == LayerKind::SoftmaxCrossEntropy) {
    const std::size_t K = gen.size(2, 14);
    Tensor logits = random_tensor(gen, {B, K}, -3.0, 3.0);
    std::vector<int> targets;
    for (std::size_t b = 0; b < B; ++b) targets.push_back(static_cast<int>(gen.size(1, K)));
    har::nn::SoftmaxCrossEntropy head;
    head.forward(logits, targets);
    const Tensor g = head.backward();
    auto loss = [&] { return head.forward(logits, targets); };
    for (std::size_t i = 0; i < logits.size(); ++i) fd(loss, logits[i], g[i], "softmax_xent logits");
    return out;
  }

  LayerSpec spec;
  spec.kind = kind;
  Tensor x;
  switch (kind) {
    case LayerKind::Conv1D: {
      spec.in = gen.size(1, 4);
      spec.out = gen.size(1, 4);
      spec.kernel = gen.size(1, 5);
      spec.stride = gen.size(1, 3);
      spec.padding = gen.size(0, spec.kernel / 2);
      const std::size_t L = gen.size(std::max<std::size_t>(1, spec.kernel), 12);
      x = random_tensor(gen, {B, spec.in, L});
      break;
    }
    case LayerKind::Conv2D: {
      spec.in = gen.size(1, 3);
      spec.out = gen.size(1, 3);
      spec.kernel = gen.size(1, 3);
      spec.stride = gen.size(1, 2);
      spec.padding = gen.size(0, spec.kernel / 2);
      x = random_tensor(gen, {B, spec.in, gen.size(spec.kernel, 7), gen.size(spec.kernel, 7)});
      break;
    }
    case LayerKind::MaxPool1D: {
      spec.kernel = gen.size(1, 3);
      spec.stride = gen.size(1, 3);
      x = kink_free_tensor(gen, {B, gen.size(1, 3), gen.size(spec.kernel, 10)});
      break;
    }
    case LayerKind::MaxPool2D: {
      spec.kernel = gen.size(1, 3);
      spec.stride = gen.size(1, 3);
      x = kink_free_tensor(gen, {B, gen.size(1, 3), gen.size(spec.kernel, 7), gen.size(spec.kernel, 7)});
      break;
    }
    case LayerKind::Dense: {
      spec.in = gen.size(1, 8);
      spec.out = gen.size(1, 8);
      x = random_tensor(gen, {B, spec.in});
      break;
    }
    case LayerKind::ReLU:
      x = kink_free_tensor(gen, {B, gen.size(1, 4), gen.size(1, 6)});
      break;
    case LayerKind::Flatten:
      x = random_tensor(gen, {B, gen.size(1, 3), gen.size(1, 4), gen.size(1, 4)});
      break;
    default:
      break;
  }

  auto layer = har::nn::make_layer(spec);
  std::mt19937_64 init(gen.rng());
  har::nn::he_uniform_init(*layer, init);
  for (auto* p : layer->parameters())
    for (auto& v : p->value.values()) v += gen.real(-0.1, 0.1);  // non-zero biases too

  const Tensor y = layer->forward(x);
  const Tensor w = random_tensor(gen, y.shape());
  for (auto* p : layer->parameters()) p->zero_grad();
  const Tensor gx = layer->backward(w);
  std::vector<Tensor> grads;
  for (auto* p : layer->parameters()) grads.push_back(p->grad);

  auto loss = [&] { return weighted_sum(layer->forward(x), w); };
  for (std::size_t i = 0; i < x.size(); ++i) fd(loss, x[i], gx[i], name + " input");
  auto params = layer->parameters();
  for (std::size_t k = 0; k < params.size(); ++k)
    for (std::size_t i = 0; i < params[k]->value.size(); ++i)
      fd(loss, params[k]->value[i], grads[k][i], name + " " + params[k]->name);
  return out;
}

inline const std::vector<LayerKind>& all_layer_kinds() {
  static const std::vector<LayerKind> kinds = {
      LayerKind::Conv1D, LayerKind::Conv2D, LayerKind::MaxPool1D, LayerKind::MaxPool2D,
      LayerKind::Dense,  LayerKind::ReLU,   LayerKind::Flatten,   LayerKind::Concat,
      LayerKind::SoftmaxCrossEntropy};
  return kinds;
}

/// Parameter-gradient check of a complete model on a random two-window
/// batch, with a smaller step (1e-5) since the deep ReLU stacks have kinks
/// close to most points. At most `per_tensor` coordinates of each parameter tensor are
/// probed (all of them for smaller tensors).
inline GradCheck check_model(har::FusionMethod method, har::Subset subset, std::uint64_t seed,
                             std::size_t per_tensor) {
  har::ModelConfig cfg;
  cfg.method = method;
  cfg.subset = subset;
  har::FusionModel model(cfg, seed);
  oracle::Gen gen(seed ^ 0xabcdefULL);
  const std::size_t B = 2;
  Tensor x = random_tensor(gen, {B, cfg.window, model.input_channels()}, -2.0, 2.0);
  std::vector<int> targets = {static_cast<int>(gen.size(1, 14)), static_cast<int>(gen.size(1, 14))};

  har::nn::SoftmaxCrossEntropy head;
  model.zero_grad();
  head.forward(model.forward(x), targets);
  model.backward(head.backward());
  auto params = model.parameters();
  const auto names = model.parameter_names();
  std::vector<Tensor> grads;
  for (auto* p : params) grads.push_back(p->grad);

  GradCheck out;
  out.instances = 1;
  auto loss = [&] { return head.forward(model.forward(x), targets); };
  for (std::size_t k = 0; k < params.size(); ++k) {
    const std::size_t n = params[k]->value.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (n > per_tensor) {
      std::shuffle(idx.begin(), idx.end(), gen.rng);
      idx.resize(per_tensor);
    }
    for (auto i : idx) {
      const auto r = oracle::central_difference(loss, params[k]->value[i], 1e-5);
      if (!r.smooth) {
        ++out.skipped;
        continue;
      }
      out.record(grads[k][i], r.derivative, names[k] + "[" + std::to_string(i) + "]");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forward passes against the nested-loop oracles.

struct ForwardCheck {
  std::size_t configs = 0;
  double max_error = 0.0;
};

/// One random shape configuration; both the op functions and the layer
/// objects are compared with the oracle.
inline double forward_error(LayerKind kind, oracle::Gen& gen) {
  using namespace har::nn;
  const std::size_t B = gen.size(1, 3);
  switch (kind) {
    case LayerKind::Conv1D: {
      const std::size_t Cin = gen.size(1, 8), Cout = gen.size(1, 8), K = gen.size(1, 7);
      const std::size_t stride = gen.size(1, 3), pad = gen.size(0, 3);
      const std::size_t L = gen.size(K > 2 * pad ? K - 2 * pad : 1, 40);
      const Tensor x = random_tensor(gen, {B, Cin, L});
      const Tensor w = random_tensor(gen, {Cout, Cin, K});
      const Tensor b = random_tensor(gen, {Cout});
      const auto want = oracle::conv1d(vec(x),
                                       vec(w),
                                       vec(b), B, Cin, L, Cout, K, stride, pad);
      const auto got = conv1d_forward(x, w, b, stride, pad);
      auto layer = make_layer({LayerKind::Conv1D, Cin, Cout, K, stride, pad});
      auto ps = layer->parameters();
      std::copy(w.values().begin(), w.values().end(), ps[0]->value.values().begin());
      std::copy(b.values().begin(), b.values().end(), ps[1]->value.values().begin());
      const auto via_layer = layer->forward(x);
      return std::max(oracle::max_abs_diff(want, vec(got)),
                      oracle::max_abs_diff(want, vec(via_layer)));
    }
    case LayerKind::Conv2D: {
      const std::size_t Cin = gen.size(1, 5), Cout = gen.size(1, 6), K = gen.size(1, 5);
      const std::size_t stride = gen.size(1, 3), pad = gen.size(0, 2);
      const std::size_t lo = K > 2 * pad ? K - 2 * pad : 1;
      const std::size_t H = gen.size(lo, 14), W = gen.size(lo, 14);
      const Tensor x = random_tensor(gen, {B, Cin, H, W});
      const Tensor w = random_tensor(gen, {Cout, Cin, K, K});
      const Tensor b = random_tensor(gen, {Cout});
      const auto want = oracle::conv2d(vec(x), vec(w),
                                       vec(b), B, Cin, H, W, Cout, K, stride, pad);
      const auto got = conv2d_forward(x, w, b, stride, pad);
      auto layer = make_layer({LayerKind::Conv2D, Cin, Cout, K, stride, pad});
      auto ps = layer->parameters();
      std::copy(w.values().begin(), w.values().end(), ps[0]->value.values().begin());
      std::copy(b.values().begin(), b.values().end(), ps[1]->value.values().begin());
      const auto via_layer = layer->forward(x);
      return std::max(oracle::max_abs_diff(want, vec(got)),
                      oracle::max_abs_diff(want, vec(via_layer)));
    }
    case LayerKind::MaxPool1D: {
      const std::size_t C = gen.size(1, 6), win = gen.size(1, 4), stride = gen.size(1, 4);
      const std::size_t L = gen.size(win, 40);
      const Tensor x = random_tensor(gen, {B, C, L});
      const auto want = oracle::maxpool1d(vec(x), B, C, L, win, stride);
      const auto got = maxpool1d_forward(x, win, stride).output;
      auto layer = make_layer({LayerKind::MaxPool1D, 0, 0, win, stride, 0});
      const auto via_layer = layer->forward(x);
      return std::max(oracle::max_abs_diff(want, vec(got)),
                      oracle::max_abs_diff(want, vec(via_layer)));
    }
    case LayerKind::MaxPool2D: {
      const std::size_t C = gen.size(1, 5), win = gen.size(1, 3), stride = gen.size(1, 3);
      const std::size_t H = gen.size(win, 16), W = gen.size(win, 16);
      const Tensor x = random_tensor(gen, {B, C, H, W});
      const auto want = oracle::maxpool2d(vec(x), B, C, H, W, win, stride);
      const auto got = maxpool2d_forward(x, win, stride).output;
      auto layer = make_layer({LayerKind::MaxPool2D, 0, 0, win, stride, 0});
      const auto via_layer = layer->forward(x);
      return std::max(oracle::max_abs_diff(want, vec(got)),
                      oracle::max_abs_diff(want, vec(via_layer)));
    }
    case LayerKind::Dense: {
      const std::size_t Din = gen.size(1, 300), Dout = gen.size(1, 40);
      const Tensor x = random_tensor(gen, {B, Din});
      const Tensor w = random_tensor(gen, {Dout, Din});
      const Tensor b = random_tensor(gen, {Dout});
      const auto want = oracle::dense(vec(x), vec(w),
                                      vec(b), B, Din, Dout);
      const auto got = dense_forward(x, w, b);
      auto layer = make_layer({LayerKind::Dense, Din, Dout, 0, 1, 0});
      auto ps = layer->parameters();
      std::copy(w.values().begin(), w.values().end(), ps[0]->value.values().begin());
      std::copy(b.values().begin(), b.values().end(), ps[1]->value.values().begin());
      const auto via_layer = layer->forward(x);
      return std::max(oracle::max_abs_diff(want, vec(got)),
                      oracle::max_abs_diff(want, vec(via_layer)));
    }
    default:
      return 0.0;
  }
}

inline ForwardCheck check_forward(LayerKind kind, std::uint64_t seed, std::size_t configs) {
  oracle::Gen gen(seed);
  ForwardCheck out;
  for (std::size_t i = 0; i < configs; ++i) {
    out.max_error = std::max(out.max_error, forward_error(kind, gen));
    ++out.configs;
  }
  return out;
}

}  // namespace checks

// ---------------------------------------------------------------------------
// Confusion matrices for the metric checks, as cm[truth][predicted].

namespace checks {

using Matrix = std::vector<std::vector<std::uint64_t>>;

inline std::vector<Matrix> constructed_matrices() {
  std::vector<Matrix> out;
  const auto zeros = [](std::size_t k) { return Matrix(k, std::vector<std::uint64_t>(k, 0)); };

  out.push_back(zeros(14));  // nothing at all
  Matrix m = zeros(14);
  m[2][2] = 7;  // one class, perfect
  out.push_back(m);
  m = zeros(14);
  m[0][1] = 4;  // every prediction wrong
  m[1][0] = 3;
  out.push_back(m);
  m = zeros(14);
  for (std::size_t k = 0; k < 14; ++k) m[k][k] = k + 1;  // perfect diagonal
  out.push_back(m);
  m = zeros(14);
  m[4][5] = 9;  // class 5 never predicted, class 6 never true
  m[6][6] = 2;
  out.push_back(m);
  m = zeros(14);
  for (std::size_t k = 0; k < 14; ++k) m[k][0] = 3;  // always predicts class 1
  out.push_back(m);
  m = zeros(2);  // tp 3, fp 1, fn 1 for both classes
  m[0][0] = 3;
  m[0][1] = 1;
  m[1][0] = 1;
  m[1][1] = 3;
  out.push_back(m);
  m = zeros(3);
  m[0][0] = 1;
  m[2][1] = 5;
  out.push_back(m);
  m = zeros(1);
  m[0][0] = 12;
  out.push_back(m);
  m = zeros(14);
  m[13][13] = 1'000'000'007;  // large counts
  m[13][12] = 999'999'937;
  m[12][13] = 3;
  out.push_back(m);

  std::mt19937_64 rng(77);
  for (int i = 0; i < 20; ++i) {
    const std::size_t k = 2 + rng() % 13;
    Matrix r = zeros(k);
    for (auto& row : r)
      for (auto& c : row) c = (rng() % 3 == 0) ? rng() % 50 : 0;  // sparse, with empty rows
    out.push_back(r);
  }
  return out;
}

}  // namespace checks
