#pragma once

#include <array>
#include <vector>

#include "boneloc/geom/roi.hpp"

namespace boneloc::percept {

/// One multi-box head grid over the canvas; each cell owns a default box
/// [-0.5,-0.5,0.5,0.5] in cell units centered on the cell.
struct AnchorGrid {
  int rows = 0, cols = 0;
  double cell_w = 0.0, cell_h = 0.0;  // canvas px
};

struct AnchorRef {
  int scale = 0, row = 0, col = 0;
};

struct AnchorLayout {
  int canvas_w = 0, canvas_h = 0;
  std::vector<AnchorGrid> scales;

  int total() const {
    int m = 0;
    for (const auto& g : scales) m += g.rows * g.cols;
    return m;
  }
  AnchorRef at(int flat) const;
  int flat_index(const AnchorRef& ref) const;
};

/// Corner offsets relative to the default box, in anchor-cell units.
using CornerOffsets = std::array<double, 4>;

geom::RoiRect decode_box(const AnchorLayout& layout, const AnchorRef& ref,
                         const CornerOffsets& c);
CornerOffsets encode_box(const AnchorLayout& layout, const AnchorRef& ref,
                         const geom::RoiRect& box_px);

/// Positive anchors: cells whose center lies inside the gt box, with a
/// nearest-center fallback guaranteeing at least one positive.
std::vector<std::uint8_t> assign_positives(const AnchorLayout& layout,
                                           const geom::RoiRect& gt_canvas);

/// One multi-box prediction: raw corner offsets, confidence in (0,1) and the
/// decoded canvas rectangle (clamped to the canvas).
struct RoiBox {
  CornerOffsets corners{0, 0, 0, 0};
  double confidence = 0.5;
  AnchorRef anchor;
  geom::RoiRect decoded;
};

/// Greedy NMS (IoU > threshold suppresses) over confidence-sorted boxes,
/// then the highest-confidence survivor. Degenerate boxes are dropped;
/// throws "no roi" if none remain.
RoiBox select_roi(const std::vector<RoiBox>& predictions, double iou_threshold = 0.5);

/// Multi-box training loss over all M anchors: corner L1 restricted to
/// positive anchors plus confidence L1 everywhere (f_hat = 1 on positives).
double multibox_loss(const std::vector<RoiBox>& predictions, const AnchorLayout& layout,
                     const geom::RoiRect& gt_canvas,
                     const std::vector<std::uint8_t>& positive);

/// Resize-and-pad mapping between a frame and the network canvas: the frame
/// is scaled by `scale` (<= 1, aspect preserved) and shifted by (dx, dy);
/// padding is white.
struct Letterbox {
  double scale = 1.0;
  double dx = 0.0, dy = 0.0;
};

Letterbox fit_letterbox(int frame_w, int frame_h, int canvas_w, int canvas_h);
geom::RoiRect to_canvas(const Letterbox& lb, const geom::RoiRect& frame_box);
geom::RoiRect to_frame(const Letterbox& lb, const geom::RoiRect& canvas_box);

}  // namespace boneloc::percept
