#pragma once

#include <functional>
#include <string>
#include <vector>

#include "boneloc/nn/tensor.hpp"

namespace boneloc::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_location;
};

/// Central finite-difference verification of analytic gradients.
///
/// `loss` evaluates the scalar objective from the current parameter values;
/// `compute_grads` runs forward+backward, leaving gradients in the tensors.
/// Relative error uses |a - n| / max(|a|, |n|, floor) so near-zero gradients
/// compare absolutely.
GradCheckReport gradient_check(const std::function<double()>& loss,
                               const std::function<void()>& compute_grads,
                               const std::vector<Tensor*>& params, double h = 1e-4,
                               double floor = 1e-3);

}  // namespace boneloc::nn
