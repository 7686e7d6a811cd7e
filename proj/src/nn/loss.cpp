#include "har/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "har/errors.hpp"

namespace har::nn {

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) fail(ErrorKind::Shape, "softmax of empty logits");
  for (double z : logits)
    if (!std::isfinite(z)) fail(ErrorKind::Numeric, "non-finite logit");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += p[i] = std::exp(logits[i] - top);
  for (double& v : p) v /= sum;
  return p;
}

SoftmaxResult softmax_cross_entropy(std::span<const double> logits, int target) {
  if (target < 1 || static_cast<std::size_t>(target) > logits.size())
    fail(ErrorKind::Domain, "target class " + std::to_string(target) + " out of range");
  auto p = softmax(logits);
  // log-sum-exp form keeps the loss finite when p[target] underflows.
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - top);
  const double loss = top + std::log(sum) - logits[static_cast<std::size_t>(target - 1)];
  return {loss, std::move(p)};
}

double SoftmaxCrossEntropy::forward(const Tensor& logits, std::span<const int> targets) {
  if (logits.rank() != 2 || logits.dim(0) != targets.size())
    fail(ErrorKind::Shape, "loss expects [B x K] logits and B targets");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  probs_ = Tensor({batch, classes});
  targets_.assign(targets.begin(), targets.end());
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto r = softmax_cross_entropy(logits.values().subspan(b * classes, classes), targets[b]);
    total += r.loss;
    std::copy(r.probabilities.begin(), r.probabilities.end(), probs_.data() + b * classes);
  }
  return total / static_cast<double>(batch);
}

Tensor SoftmaxCrossEntropy::backward() const {
  Tensor g = probs_;
  const std::size_t batch = g.dim(0), classes = g.dim(1);
  const double scale = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    g[b * classes + static_cast<std::size_t>(targets_[b] - 1)] -= 1.0;
    for (std::size_t k = 0; k < classes; ++k) g[b * classes + k] *= scale;
  }
  return g;
}

}  // namespace har::nn
