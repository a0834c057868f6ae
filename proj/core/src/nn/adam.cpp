#include "boneloc/nn/adam.hpp"

#include <cmath>

#include "boneloc/error.hpp"

namespace boneloc::nn {

double OptimizerState::learning_rate() const {
  return base_lr * std::pow(decay_per_epoch, epoch);
}

void zero_grads(const std::vector<Tensor*>& params) {
  for (Tensor* p : params) {
    p->ensure_grad();
    p->zero_grad();
  }
}

void adam_step(OptimizerState& state, const std::vector<Tensor*>& params) {
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i]->values.size(), 0.0);
      state.v[i].assign(params[i]->values.size(), 0.0);
    }
  }
  state.step += 1;
  const double lr = state.learning_rate();
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));

  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    if (p.grad.size() != p.values.size())
      fail("missing gradient", "adam_step: parameter " + std::to_string(i) + " has no gradient");
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (size_t j = 0; j < p.values.size(); ++j) {
      const double g = p.grad[j];
      if (!std::isfinite(g))
        fail("non-finite gradient", "adam_step: parameter " + std::to_string(i) + " element " +
                                        std::to_string(j));
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p.values[j] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace boneloc::nn
