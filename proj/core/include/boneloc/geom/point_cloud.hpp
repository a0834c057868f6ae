#pragma once

#include <Eigen/Core>
#include <vector>

namespace boneloc::geom {

/// N x 3 points in mm with optional per-point labels/probabilities in [0, 1].
/// `labels`, when present, has exactly one value per point.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> labels;  // empty or points.size()

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_labels() const { return !labels.empty(); }

  Eigen::Vector3d centroid() const {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& p : points) c += p;
    return points.empty() ? c : Eigen::Vector3d(c / double(points.size()));
  }
};

}  // namespace boneloc::geom
