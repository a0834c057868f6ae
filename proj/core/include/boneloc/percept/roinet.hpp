#pragma once

#include <memory>
#include <vector>

#include "boneloc/geom/camera.hpp"
#include "boneloc/nn/layers.hpp"
#include "boneloc/nn/weights_io.hpp"
#include "boneloc/percept/anchors.hpp"

namespace boneloc::percept {

/// Toy-scale multi-box RoI predictor: five-conv backbone with multi-scale
/// 3x3 heads emitting 4 corner offsets + 1 confidence per anchor cell.
/// `midlayer` enables the mid-backbone auxiliary head (12x20 grid); without
/// it only the deepest 6x10 grid predicts.
struct RoiNetConfig {
  int canvas_w = 320, canvas_h = 192;
  int widths[5] = {16, 24, 32, 48, 64};
  bool midlayer = true;
};

class RoiNet {
public:
  RoiNet(const RoiNetConfig& cfg, std::uint64_t init_seed);

  const RoiNetConfig& config() const { return cfg_; }
  const AnchorLayout& anchors() const { return anchors_; }

  /// Letterboxed {3,H,W} tensor in [0,1], white padding.
  nn::Tensor prepare_input(const geom::RgbFrame& frame) const;
  Letterbox letterbox_for(const geom::RgbFrame& frame) const {
    return fit_letterbox(frame.width, frame.height, cfg_.canvas_w, cfg_.canvas_h);
  }

  /// All M predictions in canvas coordinates.
  std::vector<RoiBox> forward(const geom::RgbFrame& frame) const;
  std::vector<RoiBox> forward_canvas(const nn::Tensor& input) const;

  /// NMS-selected best box mapped back to frame coordinates.
  geom::RoiRect predict(const geom::RgbFrame& frame) const;

  /// Multi-box training loss on one sample (gt box in canvas coordinates);
  /// accumulates parameter gradients scaled by `grad_scale`.
  double loss_and_grad(const nn::Tensor& input, const geom::RoiRect& gt_canvas,
                       double grad_scale = 1.0);
  double loss_only(const nn::Tensor& input, const geom::RoiRect& gt_canvas) const;

  std::vector<nn::Tensor*> params();

  nn::ModelFile to_model_file() const;
  static RoiNet from_model_file(const nn::ModelFile& file);

private:
  struct HeadOutputs {
    nn::Tensor tap1, tap2;  // backbone taps feeding the heads
    nn::Tensor h1, h2;      // raw head maps {5,rows,cols}; h1 empty without midlayer
  };
  HeadOutputs run_backbone(const nn::Tensor& input, std::vector<nn::Cache>* caches) const;
  std::vector<RoiBox> decode_heads(const HeadOutputs& heads) const;
  double head_loss(const HeadOutputs& heads, const geom::RoiRect& gt, nn::Tensor* dh1,
                   nn::Tensor* dh2) const;

  RoiNetConfig cfg_;
  AnchorLayout anchors_;
  std::vector<std::unique_ptr<nn::Layer>> stack_a_;  // conv1..conv3 (+pools) -> tap1
  std::vector<std::unique_ptr<nn::Layer>> stack_b_;  // conv4..conv5 (+pool)  -> tap2
  std::unique_ptr<nn::Conv2d> head1_;                // only with midlayer
  std::unique_ptr<nn::Conv2d> head2_;
};

}  // namespace boneloc::percept
