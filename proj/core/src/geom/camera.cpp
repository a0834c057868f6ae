#include "boneloc/geom/camera.hpp"

namespace boneloc::geom {

PointCloud unproject(const DepthFrame& depth, const CameraIntrinsics& k) {
  PointCloud cloud;
  cloud.points.reserve(depth.pixel_count());
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const double z = depth.at(x, y);
      if (z <= 0.0) continue;
      cloud.points.push_back(unproject_pixel(x, y, z, k));
    }
  }
  return cloud;
}

Eigen::Vector2d project(const Eigen::Vector3d& p_cam, const CameraIntrinsics& k) {
  return {k.fx * p_cam.x() / p_cam.z() + k.cx, k.fy * p_cam.y() / p_cam.z() + k.cy};
}

Eigen::Vector3d unproject_pixel(double x, double y, double z_mm, const CameraIntrinsics& k) {
  return {(x - k.cx) * z_mm / k.fx, (y - k.cy) * z_mm / k.fy, z_mm};
}

}  // namespace boneloc::geom
