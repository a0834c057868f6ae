#include "boneloc/nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <sstream>

#include "boneloc/error.hpp"

namespace boneloc::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

[[noreturn]] void shape_error(const std::string& layer, const std::vector<int>& got,
                              const std::string& expected) {
  fail("shape mismatch", layer + ": got input " + shape_str(got) + ", expected " + expected);
}

// Unpack {C,H,W}; anything else is an error for image layers.
void expect_chw(const std::string& layer, const Tensor& t, int expect_c) {
  if (t.shape.size() != 3) shape_error(layer, t.shape, "rank-3 {C,H,W}");
  if (expect_c > 0 && t.shape[0] != expect_c)
    shape_error(layer, t.shape, "{" + std::to_string(expect_c) + ",H,W}");
}

void im2col(const Tensor& in, int k, int stride, int pad, int oh, int ow, double* col) {
  const int c_in = in.shape[0], h = in.shape[1], w = in.shape[2];
  const std::int64_t patch = std::int64_t(oh) * ow;
  for (int c = 0; c < c_in; ++c) {
    const double* plane = in.data() + std::int64_t(c) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = col + ((std::int64_t(c) * k + ky) * k + kx) * patch;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          double* dst = row + std::int64_t(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + ow, 0.0);
            continue;
          }
          const double* src = plane + std::int64_t(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* col, int c_in, int h, int w, int k, int stride, int pad, int oh, int ow,
            double* out) {
  std::fill(out, out + std::int64_t(c_in) * h * w, 0.0);
  const std::int64_t patch = std::int64_t(oh) * ow;
  for (int c = 0; c < c_in; ++c) {
    double* plane = out + std::int64_t(c) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = col + ((std::int64_t(c) * k + ky) * k + kx) * patch;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          const double* src = row + std::int64_t(oy) * ow;
          double* dst = plane + std::int64_t(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

void kaiming_uniform(Tensor& t, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / double(fan_in));
  for (auto& v : t.values) v = rng.uniform(-bound, bound);
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, Rng* init)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad),
      weight_({out_ch, in_ch, kernel, kernel}), bias_({out_ch}) {
  if (init) kaiming_uniform(weight_, in_ch * kernel * kernel, *init);
}

std::string Conv2d::spec() const {
  std::ostringstream os;
  os << "conv2d " << in_ch_ << "->" << out_ch_ << " k" << kernel_ << " s" << stride_ << " p"
     << pad_;
  return os.str();
}

Tensor Conv2d::forward(const Tensor& input, Cache* cache) const {
  expect_chw(spec(), input, in_ch_);
  const int h = input.shape[1], w = input.shape[2];
  const int oh = out_height(h), ow = out_width(w);
  if (oh <= 0 || ow <= 0) shape_error(spec(), input.shape, "spatial dims >= kernel");

  const int kk = in_ch_ * kernel_ * kernel_;
  const std::int64_t patch = std::int64_t(oh) * ow;
  Tensor col({kk, int(patch)});
  im2col(input, kernel_, stride_, pad_, oh, ow, col.data());

  Tensor out({out_ch_, oh, ow});
  ConstMapMat wm(weight_.data(), out_ch_, kk);
  ConstMapMat cm(col.data(), kk, patch);
  MapMat om(out.data(), out_ch_, patch);
  om.noalias() = wm * cm;
  for (int c = 0; c < out_ch_; ++c) om.row(c).array() += bias_.values[c];

  if (cache) {
    cache->saved.push_back(std::move(col));
    cache->indices.push_back(input.shape);
  }
  return out;
}

Tensor Conv2d::backward(const Tensor& dout, const Cache& cache) {
  const Tensor& col = cache.saved.at(0);
  const std::vector<int>& in_shape = cache.indices.at(0);
  const int h = in_shape[1], w = in_shape[2];
  const int oh = dout.shape[1], ow = dout.shape[2];
  const int kk = in_ch_ * kernel_ * kernel_;
  const std::int64_t patch = std::int64_t(oh) * ow;

  weight_.ensure_grad();
  bias_.ensure_grad();
  ConstMapMat dom(dout.data(), out_ch_, patch);
  ConstMapMat cm(col.data(), kk, patch);
  MapMat dwm(weight_.grad.data(), out_ch_, kk);
  dwm.noalias() += dom * cm.transpose();
  for (int c = 0; c < out_ch_; ++c) bias_.grad[c] += dom.row(c).sum();

  Tensor dcol({kk, int(patch)});
  MapMat dcm(dcol.data(), kk, patch);
  ConstMapMat wm(weight_.data(), out_ch_, kk);
  dcm.noalias() = wm.transpose() * dom;

  Tensor din(in_shape);
  col2im(dcol.data(), in_ch_, h, w, kernel_, stride_, pad_, oh, ow, din.data());
  return din;
}

// ---------------------------------------------------------------------------
// MaxPool2d

MaxPool2d::MaxPool2d(int kernel, int stride) : kernel_(kernel), stride_(stride) {}

std::string MaxPool2d::spec() const {
  return "maxpool2d k" + std::to_string(kernel_) + " s" + std::to_string(stride_);
}

Tensor MaxPool2d::forward(const Tensor& input, Cache* cache) const {
  expect_chw(spec(), input, 0);
  const int c_n = input.shape[0], h = input.shape[1], w = input.shape[2];
  // windows clip at the borders; dims smaller than the kernel pool whole
  const int oh = std::max(1, (h - kernel_) / stride_ + 1);
  const int ow = std::max(1, (w - kernel_) / stride_ + 1);

  Tensor out({c_n, oh, ow});
  std::vector<int> argmax(out.values.size());
  for (int c = 0; c < c_n; ++c) {
    const double* plane = input.data() + std::int64_t(c) * h * w;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = -1;
        const int y_end = std::min(oy * stride_ + kernel_, h);
        const int x_end = std::min(ox * stride_ + kernel_, w);
        for (int iy = oy * stride_; iy < y_end; ++iy) {
          for (int ix = ox * stride_; ix < x_end; ++ix) {
            const double v = plane[std::int64_t(iy) * w + ix];
            if (v > best) {  // strict: first index wins ties
              best = v;
              best_idx = iy * w + ix;
            }
          }
        }
        const std::int64_t o = (std::int64_t(c) * oh + oy) * ow + ox;
        out.values[o] = best;
        argmax[o] = best_idx;
      }
    }
  }
  if (cache) {
    cache->indices.push_back(std::move(argmax));
    cache->indices.push_back(input.shape);
  }
  return out;
}

Tensor MaxPool2d::backward(const Tensor& dout, const Cache& cache) {
  const std::vector<int>& argmax = cache.indices.at(0);
  const std::vector<int>& in_shape = cache.indices.at(1);
  Tensor din(in_shape);
  const int c_n = in_shape[0], h = in_shape[1], w = in_shape[2];
  const std::int64_t per_plane_out = dout.size() / c_n;
  for (int c = 0; c < c_n; ++c) {
    double* plane = din.data() + std::int64_t(c) * h * w;
    for (std::int64_t i = 0; i < per_plane_out; ++i) {
      const std::int64_t o = c * per_plane_out + i;
      plane[argmax[o]] += dout.values[o];
    }
  }
  return din;
}

// ---------------------------------------------------------------------------
// Relu / Sigmoid

Tensor Relu::forward(const Tensor& input, Cache* cache) const {
  Tensor out = input;
  for (auto& v : out.values) v = v > 0.0 ? v : 0.0;
  if (cache) cache->saved.push_back(input);
  return out;
}

Tensor Relu::backward(const Tensor& dout, const Cache& cache) {
  const Tensor& in = cache.saved.at(0);
  Tensor din = dout;
  for (std::int64_t i = 0; i < din.size(); ++i)
    if (in.values[i] <= 0.0) din.values[i] = 0.0;
  return din;
}

Tensor Sigmoid::forward(const Tensor& input, Cache* cache) const {
  Tensor out = input;
  // logits clamp at +-16: outputs stay strictly inside (0,1) and the
  // gradient floor (~1e-7) stays above Adam's epsilon, so a unit saturated
  // on the wrong side of an L1 target can still recover
  for (auto& v : out.values) v = 1.0 / (1.0 + std::exp(-std::clamp(v, -16.0, 16.0)));
  if (cache) cache->saved.push_back(out);
  return out;
}

Tensor Sigmoid::backward(const Tensor& dout, const Cache& cache) {
  const Tensor& y = cache.saved.at(0);
  Tensor din = dout;
  for (std::int64_t i = 0; i < din.size(); ++i)
    din.values[i] *= y.values[i] * (1.0 - y.values[i]);
  return din;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(int in_dim, int out_dim, Rng* init)
    : in_dim_(in_dim), out_dim_(out_dim), weight_({out_dim, in_dim}), bias_({out_dim}) {
  if (init) kaiming_uniform(weight_, in_dim, *init);
}

std::string Linear::spec() const {
  return "linear " + std::to_string(in_dim_) + "->" + std::to_string(out_dim_);
}

Tensor Linear::forward(const Tensor& input, Cache* cache) const {
  Tensor in2d = input;
  if (in2d.shape.size() == 1) in2d.shape = {1, in2d.shape[0]};
  if (in2d.shape.size() != 2 || in2d.shape[1] != in_dim_)
    shape_error(spec(), input.shape, "{N," + std::to_string(in_dim_) + "}");
  const int n = in2d.shape[0];

  Tensor out({n, out_dim_});
  ConstMapMat im(in2d.data(), n, in_dim_);
  ConstMapMat wm(weight_.data(), out_dim_, in_dim_);
  MapMat om(out.data(), n, out_dim_);
  om.noalias() = im * wm.transpose();
  Eigen::Map<const Eigen::VectorXd> bm(bias_.data(), out_dim_);
  om.rowwise() += bm.transpose();

  if (cache) {
    cache->saved.push_back(std::move(in2d));
    cache->indices.push_back(input.shape);
  }
  if (input.shape.size() == 1) out.shape = {out_dim_};
  return out;
}

Tensor Linear::backward(const Tensor& dout, const Cache& cache) {
  const Tensor& in2d = cache.saved.at(0);
  const std::vector<int>& orig_shape = cache.indices.at(0);
  const int n = in2d.shape[0];

  weight_.ensure_grad();
  bias_.ensure_grad();
  ConstMapMat dom(dout.data(), n, out_dim_);
  ConstMapMat im(in2d.data(), n, in_dim_);
  MapMat dwm(weight_.grad.data(), out_dim_, in_dim_);
  dwm.noalias() += dom.transpose() * im;
  Eigen::Map<Eigen::VectorXd> dbm(bias_.grad.data(), out_dim_);
  dbm += dom.colwise().sum().transpose();

  Tensor din({n, in_dim_});
  ConstMapMat wm(weight_.data(), out_dim_, in_dim_);
  MapMat dim(din.data(), n, in_dim_);
  dim.noalias() = dom * wm;
  din.shape = orig_shape;
  return din;
}

// ---------------------------------------------------------------------------
// GlobalMaxPool

Tensor GlobalMaxPool::forward(const Tensor& input, Cache* cache) const {
  if (input.shape.size() != 2) shape_error(spec(), input.shape, "{N,K}");
  const int n = input.shape[0], k = input.shape[1];
  Tensor out({k});
  std::vector<int> argmax(k, 0);
  for (int col = 0; col < k; ++col) out.values[col] = input.values[col];
  for (int row = 1; row < n; ++row) {
    const double* r = input.data() + std::int64_t(row) * k;
    for (int col = 0; col < k; ++col) {
      if (r[col] > out.values[col]) {  // strict: first row wins ties
        out.values[col] = r[col];
        argmax[col] = row;
      }
    }
  }
  if (cache) {
    cache->indices.push_back(std::move(argmax));
    cache->indices.push_back(input.shape);
  }
  return out;
}

Tensor GlobalMaxPool::backward(const Tensor& dout, const Cache& cache) {
  const std::vector<int>& argmax = cache.indices.at(0);
  const std::vector<int>& in_shape = cache.indices.at(1);
  Tensor din(in_shape);
  const int k = in_shape[1];
  for (int col = 0; col < k; ++col)
    din.values[std::int64_t(argmax[col]) * k + col] = dout.values[col];
  return din;
}

}  // namespace boneloc::nn
