#pragma once

#include <cstdint>
#include <vector>

#include "boneloc/geom/bvh.hpp"
#include "boneloc/geom/camera.hpp"
#include "boneloc/geom/roi.hpp"
#include "boneloc/synthcam/scene.hpp"

namespace boneloc::synthcam {

constexpr std::uint8_t kTagMiss = 255;

struct RenderResult {
  geom::RgbFrame rgb;
  geom::DepthFrame depth;                // clean depth, mm
  std::vector<std::uint8_t> tag_grid;    // PartTag per pixel, kTagMiss on miss
};

/// Holds the acceleration structure for one instance so render, dropout and
/// metadata queries share a single build.
class RenderContext {
public:
  RenderContext(const SceneInstance& scene, const geom::CameraIntrinsics& k)
      : scene_(scene), intrinsics_(k), bvh_(scene.world) {}

  const SceneInstance& scene() const { return scene_; }
  const geom::CameraIntrinsics& intrinsics() const { return intrinsics_; }
  const geom::Bvh& bvh() const { return bvh_; }

private:
  const SceneInstance& scene_;
  geom::CameraIntrinsics intrinsics_;
  geom::Bvh bvh_;
};

/// Primary-ray render: flat Lambertian shading, depth = camera-frame z of
/// the nearest hit, part tag recorded per pixel. Misses give depth 0.
RenderResult render(const RenderContext& ctx);
RenderResult render(const SceneInstance& scene, const geom::CameraIntrinsics& k);

/// Zeroes every valid pixel whose surface point is shadowed from the
/// projector position (any hit strictly between, 1e-3 mm end clearance).
geom::DepthFrame simulate_dropout(const RenderContext& ctx, const geom::DepthFrame& clean);
geom::DepthFrame simulate_dropout(const SceneInstance& scene, const geom::CameraIntrinsics& k,
                                  const geom::DepthFrame& clean);

/// Count of pixels whose part tag is Femur.
std::size_t femur_pixel_count(const std::vector<std::uint8_t>& tag_grid);

/// Number of occluder-tag pixels that would see femur if occluders were
/// removed (the generator's occlusion metadata).
std::size_t occluded_femur_pixels(const RenderContext& ctx, const RenderResult& result);

struct CaptureLabels {
  std::vector<std::uint8_t> femur_mask;  // 1 = femur, same grid as depth
  geom::RoiRect roi_gt;
};

/// Mask = femur tag AND post-noise depth > 0; roi = tight bounding rect.
/// Throws "unlabelable capture" when the mask is empty.
CaptureLabels label_capture(const std::vector<std::uint8_t>& tag_grid,
                            const geom::DepthFrame& depth_after_noise);

}  // namespace boneloc::synthcam
