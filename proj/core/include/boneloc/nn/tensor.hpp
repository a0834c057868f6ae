#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace boneloc::nn {

/// Fixed-alignment storage: Eigen's product kernels pick accumulation paths
/// by pointer alignment, so aligned buffers keep seeded training bitwise
/// reproducible run to run.
using AlignedVec = std::vector<double, Eigen::aligned_allocator<double>>;

/// Dense double-precision tensor with an optional gradient of the same shape.
struct Tensor {
  std::vector<int> shape;
  AlignedVec values;
  AlignedVec grad;  // empty until ensure_grad()

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), values(count(shape), 0.0) {}

  static std::int64_t count(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) n *= d;
    return n;
  }

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
  void zero_grad() { grad.assign(values.size(), 0.0); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

std::string shape_str(const std::vector<int>& shape);

/// Sum of absolute differences with subgradient 0 at exact ties.
/// Returns the loss; when `grad_out` is non-null it receives dLoss/dPred.
double l1_loss(const Tensor& pred, const Tensor& target, Tensor* grad_out = nullptr);

}  // namespace boneloc::nn
