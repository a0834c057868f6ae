#pragma once

#include <string>

#include "boneloc/geom/kdtree.hpp"
#include "boneloc/geom/point_cloud.hpp"

namespace boneloc::reg {

/// Digitised model surface in the femur model frame plus the sphere-fitted
/// hip center. Read-only after construction; shareable across threads.
struct ReferenceModel {
  geom::PointCloud surface;
  geom::KdTree index;
  Eigen::Vector3d hip_center{0, 0, 0};

  ReferenceModel() = default;
  ReferenceModel(geom::PointCloud cloud, const Eigen::Vector3d& hip)
      : surface(std::move(cloud)), index(surface), hip_center(hip) {}
};

/// Binary cloud (uint64 count + count*3 little-endian doubles) plus a JSON
/// sidecar `<path>.json` holding the hip center.
void save_reference(const std::string& path, const ReferenceModel& model);
ReferenceModel load_reference(const std::string& path);

}  // namespace boneloc::reg
