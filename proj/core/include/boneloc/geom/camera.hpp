#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "boneloc/geom/point_cloud.hpp"

namespace boneloc::geom {

/// Calibrated pinhole model, no distortion. Pixel (x, y) samples the ray
/// through ((x - cx)/fx, (y - cy)/fy, 1) in the camera frame (z forward).
struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;  // px
  double cx = 0.0, cy = 0.0;  // px
  int width = 0, height = 0;  // px

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && cx > 0.0 && cx < width && cy > 0.0 && cy < height;
  }
};

/// Depth grid in mm; 0 is the sole invalid/dropout marker, everything else
/// finite and positive.
struct DepthFrame {
  int width = 0, height = 0;
  std::vector<double> z_mm;  // row-major, width*height

  DepthFrame() = default;
  DepthFrame(int w, int h, double fill = 0.0) : width(w), height(h), z_mm(size_t(w) * h, fill) {}

  double at(int x, int y) const { return z_mm[size_t(y) * width + x]; }
  double& at(int x, int y) { return z_mm[size_t(y) * width + x]; }
  size_t pixel_count() const { return z_mm.size(); }
};

/// 8-bit RGB image, row-major, interleaved.
struct RgbFrame {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;  // width*height*3

  RgbFrame() = default;
  RgbFrame(int w, int h) : width(w), height(h), rgb(size_t(w) * h * 3, 0) {}

  const std::uint8_t* at(int x, int y) const { return &rgb[(size_t(y) * width + x) * 3]; }
  std::uint8_t* at(int x, int y) { return &rgb[(size_t(y) * width + x) * 3]; }
};

/// Back-project all valid pixels; zero-depth pixels are skipped.
PointCloud unproject(const DepthFrame& depth, const CameraIntrinsics& k);

/// Forward pinhole projection of a camera-frame point (z > 0) to pixel coords.
Eigen::Vector2d project(const Eigen::Vector3d& p_cam, const CameraIntrinsics& k);

/// Back-project one pixel at the given depth.
Eigen::Vector3d unproject_pixel(double x, double y, double z_mm, const CameraIntrinsics& k);

}  // namespace boneloc::geom
