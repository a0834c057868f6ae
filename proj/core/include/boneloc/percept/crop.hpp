#pragma once

#include <cstdint>
#include <vector>

#include "boneloc/geom/camera.hpp"
#include "boneloc/geom/point_cloud.hpp"
#include "boneloc/geom/roi.hpp"

namespace boneloc::percept {

/// Resampled crop ready for SegNet: exactly N centroid-centered points plus
/// the centroid (for pose recovery) and each point's source pixel (for label
/// lookup and diagnostics).
struct SegSample {
  geom::PointCloud centered;        // N points, centroid-subtracted, mm
  Eigen::Vector3d centroid{0, 0, 0};
  std::vector<int> source_pixel;    // flat y*width+x per point
};

/// Valid pixels inside roi are unprojected, subsampled uniformly at random
/// to exactly n (seeded) or padded by resampling with replacement when
/// fewer; every distinct valid pixel is kept in the padded case. Throws
/// "empty roi" when no valid pixel falls inside.
SegSample crop_and_resample(const geom::DepthFrame& depth, const geom::RoiRect& roi,
                            const geom::CameraIntrinsics& k, int n, std::uint64_t seed);

}  // namespace boneloc::percept
