#pragma once

// Test-side oracles, independent of the accelerated implementation paths
// they check (no BVH traversal, no spatial index).

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "boneloc/geom/camera.hpp"
#include "boneloc/geom/mesh.hpp"
#include "boneloc/synthcam/scene.hpp"

namespace boneloc::test_support {

/// Exhaustive per-pixel nearest-triangle depth (no acceleration structure).
inline geom::DepthFrame render_depth_brute(const synthcam::SceneInstance& scene,
                                           const geom::CameraIntrinsics& k) {
  geom::DepthFrame depth(k.width, k.height, 0.0);
  const Eigen::Vector3d origin = scene.camera_pose.translation();
  const Eigen::Matrix3d& r_wc = scene.camera_pose.rotation();
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Eigen::Vector3d dir_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const double dir_norm = dir_cam.norm();
      const Eigen::Vector3d dir = (r_wc * dir_cam) / dir_norm;
      const auto hit = geom::raycast_brute(scene.world, origin, dir);
      if (hit) depth.at(x, y) = hit->t / dir_norm;
    }
  }
  return depth;
}

/// Two-viewpoint visibility oracle: a valid pixel survives iff no triangle
/// lies strictly between its surface point and the projector (1e-3 mm
/// clearance), checked by exhaustive scan.
inline geom::DepthFrame dropout_brute(const synthcam::SceneInstance& scene,
                                      const geom::CameraIntrinsics& k,
                                      const geom::DepthFrame& clean) {
  geom::DepthFrame out = clean;
  constexpr double kEps = 1e-3;
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const double z = clean.at(x, y);
      if (z <= 0.0) continue;
      const Eigen::Vector3d p = scene.camera_pose.apply(geom::unproject_pixel(x, y, z, k));
      const Eigen::Vector3d to_proj = scene.projector_pos - p;
      const double dist = to_proj.norm();
      const Eigen::Vector3d dir = to_proj / dist;
      bool blocked = false;
      for (size_t tri = 0; tri < scene.world.triangle_count() && !blocked; ++tri) {
        const auto t = geom::intersect_triangle(p, dir, scene.world.triangle_vertex(tri, 0),
                                                scene.world.triangle_vertex(tri, 1),
                                                scene.world.triangle_vertex(tri, 2));
        blocked = t && *t > kEps && *t < dist - kEps;
      }
      if (blocked) out.at(x, y) = 0.0;
    }
  }
  return out;
}

}  // namespace boneloc::test_support
