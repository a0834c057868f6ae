#pragma once

#include <cstdint>
#include <vector>

#include "boneloc/geom/camera.hpp"
#include "boneloc/geom/roi.hpp"

namespace boneloc::harness {

/// Band-pass hue filter (wrap-around allowed) with saturation/value floors;
/// default covers the purple glove/tape range.
struct HsvBand {
  double hue_lo_deg = 260.0, hue_hi_deg = 320.0;
  double sat_min = 0.3;
  double val_min = 0.2;

  bool contains(double h_deg, double s, double v) const;
};

struct Hsv {
  double h = 0.0, s = 0.0, v = 0.0;  // h in [0,360)
};
Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);

struct PairwiseLabel {
  std::vector<std::uint8_t> femur_mask;  // frame-2 labels, subset of frame-1 mask
  geom::RoiRect roi_gt;
  int removed_pixels = 0;
};

/// Frame-1's femur mask minus the frame-2 pixels whose color falls in the
/// band (the detected foreground). Camera and target must not have moved.
/// Throws "target fully occluded" when nothing remains.
PairwiseLabel pairwise_label(const std::vector<std::uint8_t>& frame1_mask,
                             const geom::RgbFrame& frame2_rgb, const HsvBand& band);

}  // namespace boneloc::harness
