#include "boneloc/percept/roinet.hpp"

#include <cmath>

#include "boneloc/error.hpp"

namespace boneloc::percept {

using nn::Cache;
using nn::Tensor;

namespace {

Tensor backprop_stack(const std::vector<std::unique_ptr<nn::Layer>>& stack, Tensor dy,
                      const std::vector<Cache>& caches, size_t cache_offset) {
  for (size_t i = stack.size(); i-- > 0;) dy = stack[i]->backward(dy, caches[cache_offset + i]);
  return dy;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

RoiNet::RoiNet(const RoiNetConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  Rng rng(init_seed);
  const int* w = cfg_.widths;

  stack_a_.push_back(std::make_unique<nn::Conv2d>(3, w[0], 5, 2, 2, &rng));
  stack_a_.push_back(std::make_unique<nn::Relu>());
  stack_a_.push_back(std::make_unique<nn::MaxPool2d>(2, 2));
  stack_a_.push_back(std::make_unique<nn::Conv2d>(w[0], w[1], 3, 1, 1, &rng));
  stack_a_.push_back(std::make_unique<nn::Relu>());
  stack_a_.push_back(std::make_unique<nn::MaxPool2d>(2, 2));
  stack_a_.push_back(std::make_unique<nn::Conv2d>(w[1], w[2], 3, 1, 1, &rng));
  stack_a_.push_back(std::make_unique<nn::Relu>());
  stack_a_.push_back(std::make_unique<nn::MaxPool2d>(2, 2));

  stack_b_.push_back(std::make_unique<nn::Conv2d>(w[2], w[3], 3, 1, 1, &rng));
  stack_b_.push_back(std::make_unique<nn::Relu>());
  stack_b_.push_back(std::make_unique<nn::MaxPool2d>(2, 2));
  stack_b_.push_back(std::make_unique<nn::Conv2d>(w[3], w[4], 3, 1, 1, &rng));
  stack_b_.push_back(std::make_unique<nn::Relu>());

  // zero-init heads with the confidence bias at the positive-anchor prior:
  // corners start on the default boxes, negatives are born near-satisfied,
  // and the few positives climb on feature evidence instead of fighting a
  // 50:1 majority current
  constexpr double kConfidencePrior = -4.0;  // sigmoid(-4) ~ 0.018
  if (cfg_.midlayer) {
    head1_ = std::make_unique<nn::Conv2d>(w[2], 5, 3, 1, 1);
    head1_->bias().values[4] = kConfidencePrior;
  }
  head2_ = std::make_unique<nn::Conv2d>(w[4], 5, 3, 1, 1);
  head2_->bias().values[4] = kConfidencePrior;

  const int g1_rows = cfg_.canvas_h / 16, g1_cols = cfg_.canvas_w / 16;
  const int g2_rows = cfg_.canvas_h / 32, g2_cols = cfg_.canvas_w / 32;
  anchors_.canvas_w = cfg_.canvas_w;
  anchors_.canvas_h = cfg_.canvas_h;
  if (cfg_.midlayer)
    anchors_.scales.push_back(
        {g1_rows, g1_cols, double(cfg_.canvas_w) / g1_cols, double(cfg_.canvas_h) / g1_rows});
  anchors_.scales.push_back(
      {g2_rows, g2_cols, double(cfg_.canvas_w) / g2_cols, double(cfg_.canvas_h) / g2_rows});
}

Tensor RoiNet::prepare_input(const geom::RgbFrame& frame) const {
  const Letterbox lb = letterbox_for(frame);
  Tensor out({3, cfg_.canvas_h, cfg_.canvas_w});
  std::fill(out.values.begin(), out.values.end(), 1.0);  // white margin

  const int sw = int(std::lround(frame.width * lb.scale));
  const int sh = int(std::lround(frame.height * lb.scale));
  const int ox = int(lb.dx), oy = int(lb.dy);
  for (int y = 0; y < sh; ++y) {
    for (int x = 0; x < sw; ++x) {
      double rgb[3];
      if (lb.scale >= 1.0) {
        const std::uint8_t* px = frame.at(x, y);
        for (int c = 0; c < 3; ++c) rgb[c] = px[c] / 255.0;
      } else {  // bilinear subsample
        const double fx = std::min((x + 0.5) / lb.scale - 0.5, double(frame.width - 1));
        const double fy = std::min((y + 0.5) / lb.scale - 0.5, double(frame.height - 1));
        const int x0 = std::max(0, int(fx)), y0 = std::max(0, int(fy));
        const int x1 = std::min(x0 + 1, frame.width - 1), y1 = std::min(y0 + 1, frame.height - 1);
        const double ax = std::clamp(fx - x0, 0.0, 1.0), ay = std::clamp(fy - y0, 0.0, 1.0);
        for (int c = 0; c < 3; ++c) {
          rgb[c] = (frame.at(x0, y0)[c] * (1 - ax) * (1 - ay) +
                    frame.at(x1, y0)[c] * ax * (1 - ay) +
                    frame.at(x0, y1)[c] * (1 - ax) * ay + frame.at(x1, y1)[c] * ax * ay) /
                   255.0;
        }
      }
      for (int c = 0; c < 3; ++c)
        out.values[(std::size_t(c) * cfg_.canvas_h + (y + oy)) * cfg_.canvas_w + (x + ox)] =
            rgb[c];
    }
  }
  return out;
}

RoiNet::HeadOutputs RoiNet::run_backbone(const Tensor& input, std::vector<Cache>* caches) const {
  // cache layout: [stack_a..., stack_b..., head1, head2]
  HeadOutputs heads;
  const size_t na = stack_a_.size(), nb = stack_b_.size();
  if (caches) caches->assign(na + nb + 2, Cache{});
  Tensor x = input;
  for (size_t i = 0; i < na; ++i) x = stack_a_[i]->forward(x, caches ? &(*caches)[i] : nullptr);
  heads.tap1 = std::move(x);
  x = heads.tap1;
  for (size_t i = 0; i < nb; ++i)
    x = stack_b_[i]->forward(x, caches ? &(*caches)[na + i] : nullptr);
  heads.tap2 = std::move(x);
  if (head1_) heads.h1 = head1_->forward(heads.tap1, caches ? &(*caches)[na + nb] : nullptr);
  heads.h2 = head2_->forward(heads.tap2, caches ? &(*caches)[na + nb + 1] : nullptr);
  return heads;
}

std::vector<RoiBox> RoiNet::decode_heads(const HeadOutputs& heads) const {
  std::vector<RoiBox> out;
  out.reserve(anchors_.total());
  int scale = 0;
  auto emit = [&](const Tensor& h) {
    const int rows = h.shape[1], cols = h.shape[2];
    const std::size_t plane = std::size_t(rows) * cols;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        RoiBox box;
        box.anchor = {scale, r, c};
        const std::size_t px = std::size_t(r) * cols + c;
        for (int k = 0; k < 4; ++k) box.corners[k] = h.values[k * plane + px];
        box.confidence = sigmoid(h.values[4 * plane + px]);
        box.decoded = decode_box(anchors_, box.anchor, box.corners)
                          .clamped(anchors_.canvas_w, anchors_.canvas_h);
        out.push_back(box);
      }
    }
    ++scale;
  };
  if (head1_) emit(heads.h1);
  emit(heads.h2);
  return out;
}

std::vector<RoiBox> RoiNet::forward_canvas(const Tensor& input) const {
  return decode_heads(run_backbone(input, nullptr));
}

std::vector<RoiBox> RoiNet::forward(const geom::RgbFrame& frame) const {
  return forward_canvas(prepare_input(frame));
}

geom::RoiRect RoiNet::predict(const geom::RgbFrame& frame) const {
  const RoiBox best = select_roi(forward(frame));
  const geom::RoiRect box =
      to_frame(letterbox_for(frame), best.decoded).clamped(frame.width, frame.height);
  if (box.degenerate()) fail("no roi", "RoiNet::predict: selected box degenerate in frame");
  return box;
}

double RoiNet::head_loss(const HeadOutputs& heads, const geom::RoiRect& gt, Tensor* dh1,
                         Tensor* dh2) const {
  const auto positive = assign_positives(anchors_, gt);
  double loss = 0.0;
  int scale = 0;
  int flat = 0;
  auto accumulate = [&](const Tensor& h, Tensor* dh) {
    const int rows = h.shape[1], cols = h.shape[2];
    const std::size_t plane = std::size_t(rows) * cols;
    if (dh) *dh = Tensor(h.shape);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c, ++flat) {
        const std::size_t px = std::size_t(r) * cols + c;
        const bool pos = positive[flat] != 0;
        if (pos) {
          const CornerOffsets target = encode_box(anchors_, {scale, r, c}, gt);
          for (int k = 0; k < 4; ++k) {
            const double d = h.values[k * plane + px] - target[k];
            loss += std::abs(d);
            if (dh) dh->values[k * plane + px] = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
          }
        }
        const double raw = h.values[4 * plane + px];
        const double f = sigmoid(raw);
        const double fhat = pos ? 1.0 : 0.0;
        loss += std::abs(f - fhat);
        if (dh) {
          const double sign = f > fhat ? 1.0 : (f < fhat ? -1.0 : 0.0);
          dh->values[4 * plane + px] = sign * f * (1.0 - f);
        }
      }
    }
    ++scale;
  };
  if (head1_) accumulate(heads.h1, dh1);
  accumulate(heads.h2, dh2);
  return loss;
}

double RoiNet::loss_and_grad(const Tensor& input, const geom::RoiRect& gt, double grad_scale) {
  std::vector<Cache> caches;
  const HeadOutputs heads = run_backbone(input, &caches);
  Tensor dh1, dh2;
  const double loss = head_loss(heads, gt, &dh1, &dh2);

  if (grad_scale != 1.0) {
    for (auto& v : dh1.values) v *= grad_scale;
    for (auto& v : dh2.values) v *= grad_scale;
  }
  const size_t na = stack_a_.size(), nb = stack_b_.size();
  Tensor dtap2 = head2_->backward(dh2, caches[na + nb + 1]);
  Tensor dtap1 = backprop_stack(stack_b_, dtap2, caches, na);
  if (head1_) {
    const Tensor d_aux = head1_->backward(dh1, caches[na + nb]);
    for (std::int64_t i = 0; i < dtap1.size(); ++i) dtap1.values[i] += d_aux.values[i];
  }
  backprop_stack(stack_a_, dtap1, caches, 0);
  return loss;
}

double RoiNet::loss_only(const Tensor& input, const geom::RoiRect& gt) const {
  return head_loss(run_backbone(input, nullptr), gt, nullptr, nullptr);
}

std::vector<Tensor*> RoiNet::params() {
  std::vector<Tensor*> out;
  for (auto& l : stack_a_)
    for (Tensor* p : l->params()) out.push_back(p);
  for (auto& l : stack_b_)
    for (Tensor* p : l->params()) out.push_back(p);
  if (head1_)
    for (Tensor* p : head1_->params()) out.push_back(p);
  for (Tensor* p : head2_->params()) out.push_back(p);
  return out;
}

nn::ModelFile RoiNet::to_model_file() const {
  nn::ModelFile file;
  file.kind = "roinet";
  file.config["canvas_w"] = cfg_.canvas_w;
  file.config["canvas_h"] = cfg_.canvas_h;
  for (int i = 0; i < 5; ++i) file.config["width" + std::to_string(i + 1)] = cfg_.widths[i];
  file.config["midlayer"] = cfg_.midlayer ? 1.0 : 0.0;

  auto* self = const_cast<RoiNet*>(this);
  int idx = 0;
  for (Tensor* p : self->params())
    file.tensors.push_back({"p" + std::to_string(idx++), *p});
  for (const auto& l : stack_a_) file.layer_specs.push_back(l->spec());
  for (const auto& l : stack_b_) file.layer_specs.push_back(l->spec());
  if (head1_) file.layer_specs.push_back("head1 " + head1_->spec());
  file.layer_specs.push_back("head2 " + head2_->spec());
  return file;
}

RoiNet RoiNet::from_model_file(const nn::ModelFile& file) {
  if (file.kind != "roinet") fail("bad model file", "expected kind roinet, got " + file.kind);
  RoiNetConfig cfg;
  cfg.canvas_w = int(file.config.at("canvas_w"));
  cfg.canvas_h = int(file.config.at("canvas_h"));
  for (int i = 0; i < 5; ++i) cfg.widths[i] = int(file.config.at("width" + std::to_string(i + 1)));
  cfg.midlayer = file.config.at("midlayer") != 0.0;

  RoiNet net(cfg, 0);
  auto params = net.params();
  if (params.size() != file.tensors.size())
    fail("bad model file", "roinet: tensor count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape != file.tensors[i].tensor.shape)
      fail("bad model file", "roinet: tensor " + std::to_string(i) + " shape mismatch");
    params[i]->values = file.tensors[i].tensor.values;
  }
  return net;
}

}  // namespace boneloc::percept
