#pragma once

#include <memory>
#include <string>
#include <vector>

#include "boneloc/nn/tensor.hpp"
#include "boneloc/rng.hpp"

namespace boneloc::nn {

/// Per-call forward context. Training passes one so backward can replay;
/// inference passes nullptr and the layer stays strictly read-only, which
/// keeps concurrent inference on shared models safe.
struct Cache {
  std::vector<Tensor> saved;
  std::vector<std::vector<int>> indices;
};

class Layer {
public:
  virtual ~Layer() = default;

  virtual Tensor forward(const Tensor& input, Cache* cache = nullptr) const = 0;
  /// Accumulates parameter gradients and returns the input gradient.
  virtual Tensor backward(const Tensor& dout, const Cache& cache) = 0;
  virtual std::vector<Tensor*> params() { return {}; }
  virtual std::string spec() const = 0;
};

/// 2D convolution over {C,H,W} tensors, row-major, zero padding.
class Conv2d : public Layer {
public:
  Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, Rng* init = nullptr);

  Tensor forward(const Tensor& input, Cache* cache = nullptr) const override;
  Tensor backward(const Tensor& dout, const Cache& cache) override;
  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
  std::string spec() const override;

  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }
  int out_height(int h) const { return (h + 2 * pad_ - kernel_) / stride_ + 1; }
  int out_width(int w) const { return out_height(w); }

private:
  int in_ch_, out_ch_, kernel_, stride_, pad_;
  Tensor weight_;  // {out_ch, in_ch, k, k}
  Tensor bias_;    // {out_ch}
};

/// Max pooling over {C,H,W}; gradient routes to the first argmax on ties.
class MaxPool2d : public Layer {
public:
  MaxPool2d(int kernel, int stride);

  Tensor forward(const Tensor& input, Cache* cache = nullptr) const override;
  Tensor backward(const Tensor& dout, const Cache& cache) override;
  std::string spec() const override;

private:
  int kernel_, stride_;
};

class Relu : public Layer {
public:
  Tensor forward(const Tensor& input, Cache* cache = nullptr) const override;
  Tensor backward(const Tensor& dout, const Cache& cache) override;
  std::string spec() const override { return "relu"; }
};

class Sigmoid : public Layer {
public:
  Tensor forward(const Tensor& input, Cache* cache = nullptr) const override;
  Tensor backward(const Tensor& dout, const Cache& cache) override;
  std::string spec() const override { return "sigmoid"; }
};

/// Fully connected y = x W^T + b applied row-wise: input {N, in} -> {N, out}.
/// With N = point count this is the shared per-point MLP; with N = 1 a dense
/// head. A bare {in} vector is treated as {1, in}.
class Linear : public Layer {
public:
  Linear(int in_dim, int out_dim, Rng* init = nullptr);

  Tensor forward(const Tensor& input, Cache* cache = nullptr) const override;
  Tensor backward(const Tensor& dout, const Cache& cache) override;
  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
  std::string spec() const override;

  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }

private:
  int in_dim_, out_dim_;
  Tensor weight_;  // {out, in}
  Tensor bias_;    // {out}
};

/// Column-wise max over points: {N, K} -> {K}; gradient goes only to the
/// first row attaining each column maximum.
class GlobalMaxPool : public Layer {
public:
  Tensor forward(const Tensor& input, Cache* cache = nullptr) const override;
  Tensor backward(const Tensor& dout, const Cache& cache) override;
  std::string spec() const override { return "global-max-pool"; }
};

/// Kaiming-uniform fill for relu stacks: U[-sqrt(6/fan_in), +sqrt(6/fan_in)].
void kaiming_uniform(Tensor& t, int fan_in, Rng& rng);

}  // namespace boneloc::nn
