#pragma once

#include <span>
#include <vector>

#include "har/nn/tensor.hpp"

namespace har::nn {

struct SoftmaxResult {
  double loss;
  std::vector<double> probabilities;
};

/// Max-subtracted softmax and -log p[target]. `target` is 1-based
/// (activity ids). Throws ErrorKind::Numeric on non-finite logits.
SoftmaxResult softmax_cross_entropy(std::span<const double> logits, int target);

/// Softmax probabilities only.
std::vector<double> softmax(std::span<const double> logits);

/// Batched head: mean cross-entropy over a [B x K] logit batch.
class SoftmaxCrossEntropy {
 public:
  double forward(const Tensor& logits, std::span<const int> targets);
  /// d(mean loss)/d(logits) for the last forward call.
  Tensor backward() const;
  const Tensor& probabilities() const { return probs_; }

 private:
  Tensor probs_;
  std::vector<int> targets_;
};

}  // namespace har::nn
