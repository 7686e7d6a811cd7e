#include "har/nn/adam.hpp"

#include <cmath>

#include "har/errors.hpp"

namespace har::nn {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamOptions& o) {
  if (params.size() != grads.size()) fail(ErrorKind::Shape, "adam: gradient size mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
  }
}

Adam::Adam(std::vector<Parameter*> params, AdamOptions options)
    : params_(std::move(params)), states_(params_.size()), options_(options) {}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i)
    adam_step(params_[i]->value.values(), params_[i]->grad.values(), states_[i], options_);
  ++steps_;
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

}  // namespace har::nn
