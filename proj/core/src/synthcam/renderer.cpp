#include "boneloc/synthcam/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "boneloc/error.hpp"

namespace boneloc::synthcam {

using geom::PartTag;

RenderResult render(const RenderContext& ctx) {
  const auto& k = ctx.intrinsics();
  const auto& scene = ctx.scene();
  RenderResult out;
  out.rgb = geom::RgbFrame(k.width, k.height);
  out.depth = geom::DepthFrame(k.width, k.height);
  out.tag_grid.assign(std::size_t(k.width) * k.height, kTagMiss);

  const Eigen::Vector3d origin = scene.camera_pose.translation();
  const Eigen::Matrix3d& r_wc = scene.camera_pose.rotation();
  Rng pixel_rng(scene.seed ^ 0x9c6b);  // rgb sensor noise stream

  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Eigen::Vector3d dir_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const double dir_norm = dir_cam.norm();
      const Eigen::Vector3d dir = (r_wc * dir_cam) / dir_norm;
      const auto hit = ctx.bvh().raycast(origin, dir);
      const std::size_t idx = std::size_t(y) * k.width + x;

      Eigen::Vector3d color = Eigen::Vector3d::Zero();
      if (hit) {
        out.depth.z_mm[idx] = hit->t / dir_norm;  // camera-frame z (dir_cam.z == 1)
        out.tag_grid[idx] = std::uint8_t(hit->tag);
        Eigen::Vector3d n = scene.world.triangle_normal(hit->triangle);
        if (n.dot(dir) > 0.0) n = -n;
        const double lambert = std::max(0.0, n.dot(scene.light_dir));
        const double shade = scene.ambient + scene.light_intensity * lambert;
        color = scene.tri_albedo[hit->triangle].cwiseProduct(scene.light_tint) * shade;
      }
      std::uint8_t* px = out.rgb.at(x, y);
      for (int c = 0; c < 3; ++c) {
        double v = color[c];
        if (scene.rgb_noise_sigma > 0.0) v += pixel_rng.normal(0.0, scene.rgb_noise_sigma);
        px[c] = std::uint8_t(std::clamp(std::lround(v * 255.0), 0L, 255L));
      }
    }
  }
  return out;
}

RenderResult render(const SceneInstance& scene, const geom::CameraIntrinsics& k) {
  return render(RenderContext(scene, k));
}

geom::DepthFrame simulate_dropout(const RenderContext& ctx, const geom::DepthFrame& clean) {
  const auto& k = ctx.intrinsics();
  const auto& scene = ctx.scene();
  geom::DepthFrame out = clean;
  constexpr double kEps = 1e-3;  // mm clearance at both segment ends

  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const double z = clean.at(x, y);
      if (z <= 0.0) continue;
      const Eigen::Vector3d p_world =
          scene.camera_pose.apply(geom::unproject_pixel(x, y, z, k));
      const Eigen::Vector3d to_proj = scene.projector_pos - p_world;
      const double dist = to_proj.norm();
      if (ctx.bvh().occluded(p_world, to_proj / dist, kEps, dist - kEps)) out.at(x, y) = 0.0;
    }
  }
  return out;
}

geom::DepthFrame simulate_dropout(const SceneInstance& scene, const geom::CameraIntrinsics& k,
                                  const geom::DepthFrame& clean) {
  return simulate_dropout(RenderContext(scene, k), clean);
}

std::size_t femur_pixel_count(const std::vector<std::uint8_t>& tag_grid) {
  return std::size_t(
      std::count(tag_grid.begin(), tag_grid.end(), std::uint8_t(PartTag::Femur)));
}

std::size_t occluded_femur_pixels(const RenderContext& ctx, const RenderResult& result) {
  const auto& scene = ctx.scene();
  if (scene.occluder_tri_end == scene.occluder_tri_begin) return 0;
  bool any = false;
  for (std::uint8_t t : result.tag_grid)
    if (t == std::uint8_t(PartTag::Occluder)) { any = true; break; }
  if (!any) return 0;

  const geom::TriangleMesh no_occ = scene.world.filtered(
      [](PartTag t) { return t != PartTag::Occluder; });
  const geom::Bvh bvh(no_occ);
  const auto& k = ctx.intrinsics();
  const Eigen::Vector3d origin = scene.camera_pose.translation();
  const Eigen::Matrix3d& r_wc = scene.camera_pose.rotation();
  std::size_t count = 0;
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      if (result.tag_grid[std::size_t(y) * k.width + x] != std::uint8_t(PartTag::Occluder))
        continue;
      const Eigen::Vector3d dir_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const Eigen::Vector3d dir = (r_wc * dir_cam).normalized();
      const auto hit = bvh.raycast(origin, dir);
      if (hit && hit->tag == PartTag::Femur) ++count;
    }
  }
  return count;
}

CaptureLabels label_capture(const std::vector<std::uint8_t>& tag_grid,
                            const geom::DepthFrame& depth) {
  CaptureLabels out;
  out.femur_mask.assign(tag_grid.size(), 0);
  int x0 = depth.width, y0 = depth.height, x1 = -1, y1 = -1;
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const std::size_t idx = std::size_t(y) * depth.width + x;
      if (tag_grid[idx] == std::uint8_t(PartTag::Femur) && depth.z_mm[idx] > 0.0) {
        out.femur_mask[idx] = 1;
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) fail("unlabelable capture", "label_capture: no femur pixels after noise");
  out.roi_gt = {double(x0), double(y0), double(x1 + 1), double(y1 + 1)};
  return out;
}

}  // namespace boneloc::synthcam
