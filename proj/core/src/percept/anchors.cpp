#include "boneloc/percept/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boneloc/error.hpp"

namespace boneloc::percept {

AnchorRef AnchorLayout::at(int flat) const {
  for (int s = 0; s < int(scales.size()); ++s) {
    const int count = scales[s].rows * scales[s].cols;
    if (flat < count) return {s, flat / scales[s].cols, flat % scales[s].cols};
    flat -= count;
  }
  fail("bad index", "AnchorLayout::at: index out of range");
}

int AnchorLayout::flat_index(const AnchorRef& ref) const {
  int base = 0;
  for (int s = 0; s < ref.scale; ++s) base += scales[s].rows * scales[s].cols;
  return base + ref.row * scales[ref.scale].cols + ref.col;
}

namespace {

void cell_center(const AnchorGrid& g, const AnchorRef& ref, double* cx, double* cy) {
  *cx = (ref.col + 0.5) * g.cell_w;
  *cy = (ref.row + 0.5) * g.cell_h;
}

}  // namespace

geom::RoiRect decode_box(const AnchorLayout& layout, const AnchorRef& ref,
                         const CornerOffsets& c) {
  const AnchorGrid& g = layout.scales[ref.scale];
  double cx, cy;
  cell_center(g, ref, &cx, &cy);
  return {cx + (c[0] - 0.5) * g.cell_w, cy + (c[1] - 0.5) * g.cell_h,
          cx + (c[2] + 0.5) * g.cell_w, cy + (c[3] + 0.5) * g.cell_h};
}

CornerOffsets encode_box(const AnchorLayout& layout, const AnchorRef& ref,
                         const geom::RoiRect& box) {
  const AnchorGrid& g = layout.scales[ref.scale];
  double cx, cy;
  cell_center(g, ref, &cx, &cy);
  return {(box.x0 - cx) / g.cell_w + 0.5, (box.y0 - cy) / g.cell_h + 0.5,
          (box.x1 - cx) / g.cell_w - 0.5, (box.y1 - cy) / g.cell_h - 0.5};
}

std::vector<std::uint8_t> assign_positives(const AnchorLayout& layout,
                                           const geom::RoiRect& gt) {
  std::vector<std::uint8_t> positive(layout.total(), 0);
  bool any = false;
  int flat = 0;
  for (const auto& g : layout.scales) {
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c, ++flat) {
        const double cx = (c + 0.5) * g.cell_w;
        const double cy = (r + 0.5) * g.cell_h;
        if (cx >= gt.x0 && cx < gt.x1 && cy >= gt.y0 && cy < gt.y1) {
          positive[flat] = 1;
          any = true;
        }
      }
    }
  }
  if (!any) {  // nearest-center fallback
    const double gx = 0.5 * (gt.x0 + gt.x1), gy = 0.5 * (gt.y0 + gt.y1);
    double best = std::numeric_limits<double>::infinity();
    int best_flat = 0;
    flat = 0;
    for (const auto& g : layout.scales) {
      for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c, ++flat) {
          const double cx = (c + 0.5) * g.cell_w;
          const double cy = (r + 0.5) * g.cell_h;
          const double d = (cx - gx) * (cx - gx) + (cy - gy) * (cy - gy);
          if (d < best) {
            best = d;
            best_flat = flat;
          }
        }
      }
    }
    positive[best_flat] = 1;
  }
  return positive;
}

RoiBox select_roi(const std::vector<RoiBox>& predictions, double iou_threshold) {
  std::vector<const RoiBox*> live;
  for (const auto& p : predictions)
    if (!p.decoded.degenerate()) live.push_back(&p);
  if (live.empty()) fail("no roi", "select_roi: every prediction is degenerate");

  std::sort(live.begin(), live.end(),
            [](const RoiBox* a, const RoiBox* b) { return a->confidence > b->confidence; });
  std::vector<const RoiBox*> kept;
  for (const RoiBox* p : live) {
    bool suppressed = false;
    for (const RoiBox* k : kept) {
      if (geom::rect_iou(p->decoded, k->decoded) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(p);
  }
  return *kept.front();  // survivors sorted by confidence
}

double multibox_loss(const std::vector<RoiBox>& predictions, const AnchorLayout& layout,
                     const geom::RoiRect& gt, const std::vector<std::uint8_t>& positive) {
  if (predictions.size() != positive.size() || int(predictions.size()) != layout.total())
    fail("shape mismatch", "multibox_loss: prediction count != anchor count");
  double loss = 0.0;
  for (size_t j = 0; j < predictions.size(); ++j) {
    const RoiBox& p = predictions[j];
    if (positive[j]) {
      const CornerOffsets target = encode_box(layout, p.anchor, gt);
      for (int k = 0; k < 4; ++k) loss += std::abs(p.corners[k] - target[k]);
    }
    loss += std::abs(p.confidence - (positive[j] ? 1.0 : 0.0));
  }
  return loss;
}

Letterbox fit_letterbox(int frame_w, int frame_h, int canvas_w, int canvas_h) {
  Letterbox lb;
  lb.scale = std::min({1.0, double(canvas_w) / frame_w, double(canvas_h) / frame_h});
  lb.dx = std::floor(0.5 * (canvas_w - frame_w * lb.scale));
  lb.dy = std::floor(0.5 * (canvas_h - frame_h * lb.scale));
  return lb;
}

geom::RoiRect to_canvas(const Letterbox& lb, const geom::RoiRect& b) {
  return {b.x0 * lb.scale + lb.dx, b.y0 * lb.scale + lb.dy, b.x1 * lb.scale + lb.dx,
          b.y1 * lb.scale + lb.dy};
}

geom::RoiRect to_frame(const Letterbox& lb, const geom::RoiRect& b) {
  return {(b.x0 - lb.dx) / lb.scale, (b.y0 - lb.dy) / lb.scale, (b.x1 - lb.dx) / lb.scale,
          (b.y1 - lb.dy) / lb.scale};
}

}  // namespace boneloc::percept
