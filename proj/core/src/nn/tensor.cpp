#include "boneloc/nn/tensor.hpp"

#include <cmath>
#include <sstream>

#include "boneloc/error.hpp"

namespace boneloc::nn {

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

double l1_loss(const Tensor& pred, const Tensor& target, Tensor* grad_out) {
  if (!pred.same_shape(target))
    fail("shape mismatch",
         "l1_loss: pred " + shape_str(pred.shape) + " vs target " + shape_str(target.shape));
  double loss = 0.0;
  if (grad_out) *grad_out = Tensor(pred.shape);
  for (std::int64_t i = 0; i < pred.size(); ++i) {
    const double d = pred.values[i] - target.values[i];
    loss += std::abs(d);
    if (grad_out) grad_out->values[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  return loss;
}

}  // namespace boneloc::nn
