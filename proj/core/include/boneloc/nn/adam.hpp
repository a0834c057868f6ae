#pragma once

#include <cstdint>
#include <vector>

#include "boneloc/nn/tensor.hpp"

namespace boneloc::nn {

/// Adam with an exponentially decaying learning rate: lr = base * decay^epoch.
struct OptimizerState {
  double base_lr = 1e-3;
  double decay_per_epoch = 0.95;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  int epoch = 0;
  std::vector<std::vector<double>> m;  // first moments, one entry per parameter tensor
  std::vector<std::vector<double>> v;  // second moments

  double learning_rate() const;
};

void zero_grads(const std::vector<Tensor*>& params);

/// One Adam update from the gradients stored in `params`. Moment buffers are
/// created lazily on the first call. Non-finite gradients are an error.
void adam_step(OptimizerState& state, const std::vector<Tensor*>& params);

}  // namespace boneloc::nn
