#include "boneloc/harness/pairwise_label.hpp"

#include <algorithm>
#include <cmath>

#include "boneloc/error.hpp"

namespace boneloc::harness {

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? delta / mx : 0.0;
  if (delta > 0.0) {
    if (mx == r)
      out.h = 60.0 * std::fmod((g - b) / delta + 6.0, 6.0);
    else if (mx == g)
      out.h = 60.0 * ((b - r) / delta + 2.0);
    else
      out.h = 60.0 * ((r - g) / delta + 4.0);
  }
  return out;
}

bool HsvBand::contains(double h, double s, double v) const {
  if (s < sat_min || v < val_min) return false;
  if (hue_lo_deg <= hue_hi_deg) return h >= hue_lo_deg && h <= hue_hi_deg;
  return h >= hue_lo_deg || h <= hue_hi_deg;  // wrap-around band
}

PairwiseLabel pairwise_label(const std::vector<std::uint8_t>& frame1_mask,
                             const geom::RgbFrame& frame2, const HsvBand& band) {
  if (frame1_mask.size() != std::size_t(frame2.width) * frame2.height)
    fail("shape mismatch", "pairwise_label: mask/frame size mismatch");

  PairwiseLabel out;
  out.femur_mask.assign(frame1_mask.size(), 0);
  int x0 = frame2.width, y0 = frame2.height, x1 = -1, y1 = -1;
  for (int y = 0; y < frame2.height; ++y) {
    for (int x = 0; x < frame2.width; ++x) {
      const std::size_t idx = std::size_t(y) * frame2.width + x;
      if (!frame1_mask[idx]) continue;
      const std::uint8_t* px = frame2.at(x, y);
      const Hsv hsv = rgb_to_hsv(px[0], px[1], px[2]);
      if (band.contains(hsv.h, hsv.s, hsv.v)) {
        ++out.removed_pixels;  // foreground (occluder) detected in frame 2
        continue;
      }
      out.femur_mask[idx] = 1;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) fail("target fully occluded", "pairwise_label: no femur pixels remain");
  out.roi_gt = {double(x0), double(y0), double(x1 + 1), double(y1 + 1)};
  return out;
}

}  // namespace boneloc::harness
