#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "boneloc/geom/point_cloud.hpp"
#include "boneloc/geom/rigid_transform.hpp"
#include "boneloc/geom/roi.hpp"

namespace boneloc::harness {

/// Point/pixel confusion counts and the frame IoU = TP/(TP+FP+FN).
struct SegMetrics {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double iou = 0.0;
  bool empty_empty = false;  // both masks empty; IoU defined as 1 and flagged
};

SegMetrics mask_metrics(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);
double mask_iou(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);

/// Rectangle-IoU success criterion (> 0.5).
bool roi_success(const geom::RoiRect& pred, const geom::RoiRect& gt);

struct PoseError {
  double rot_deg = 0.0;
  double trans_mm = 0.0;
};

/// Decomposition of gt^-1 * p into axis-angle degrees and translation mm.
PoseError pose_error(const geom::RigidTransform& p, const geom::RigidTransform& p_gt);

/// Applies the composed chain (left to right) to a calibrated local surface.
geom::PointCloud gt_surface_transform(const geom::PointCloud& surface_local,
                                      std::span<const geom::RigidTransform> chain);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};
Aggregate aggregate(std::span<const double> values);
double median(std::vector<double> values);
double percentile(std::vector<double> values, double p);  // p in [0,100]

}  // namespace boneloc::harness
