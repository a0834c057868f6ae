#pragma once

#include <algorithm>

namespace boneloc::geom {

/// Axis-aligned pixel rectangle in continuous image coordinates.
/// A box covers integer pixel x with x0 <= x < x1 (same for y), so the tight
/// box of a pixel set {xmin..xmax} is [xmin, xmax+1).
struct RoiRect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  bool degenerate() const { return x1 <= x0 || y1 <= y0; }

  bool contains_pixel(int x, int y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }

  RoiRect clamped(double w, double h) const {
    return {std::clamp(x0, 0.0, w), std::clamp(y0, 0.0, h), std::clamp(x1, 0.0, w),
            std::clamp(y1, 0.0, h)};
  }
};

inline double rect_intersection_area(const RoiRect& a, const RoiRect& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  return w > 0.0 && h > 0.0 ? w * h : 0.0;
}

inline double rect_iou(const RoiRect& a, const RoiRect& b) {
  const double inter = rect_intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace boneloc::geom
