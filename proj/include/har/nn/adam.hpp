#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "har/nn/tensor.hpp"

namespace har::nn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates for one parameter vector.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamOptions& options = {});

/// Adam over a set of parameters, reading their accumulated gradients.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamOptions options = {});

  void step();
  void zero_grad();
  std::size_t steps() const { return steps_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<AdamState> states_;
  AdamOptions options_;
  std::size_t steps_ = 0;
};

}  // namespace har::nn
