#pragma once

#include <optional>
#include <string>

#include "boneloc/percept/roinet.hpp"
#include "boneloc/percept/segnet.hpp"
#include "boneloc/reg/icp.hpp"
#include "boneloc/synthcam/dataset.hpp"

namespace boneloc::reg {

struct TrackerOptions {
  bool oracle_mask = false;  // gt RoI + gt mask instead of the networks
  // erode the oracle mask this many pixels: silhouette-edge points drag the
  // point-to-point fixed pose (occlusion-boundary bias); the network path
  // sheds those points naturally when probabilities dip below tau
  int oracle_erode_px = 0;
  int n_points = 2000;
  IcpParams icp;
  BicpMode mode = BicpMode::Weighted;
  double hip_weight = -1.0;  // -1 = N_f

  // Discrete nearest-neighbour correspondence leaves a washboard of
  // micro-minima along the hip axis (the weakly constrained direction).
  // axial_scan_deg sweeps the trimmed surface RMS over +-scan about that
  // axis before registering and starts ICP at the argmin; axial_restarts
  // adds full re-registrations from rotated inits, keeping the lowest-RMS
  // result. Both default off.
  double axial_scan_deg = 0.0;
  double axial_scan_step_deg = 0.08;
  int axial_restarts = 0;
  double restart_step_deg = 0.35;
};

/// Stage-A product: the segmented femur points in the camera frame.
struct SegmentOutcome {
  bool lost = false;
  std::string lost_reason;
  geom::PointCloud femur;
};

/// RoI -> crop/resample -> segmentation -> threshold. Degenerate frames
/// (no RoI, empty crop, too few segmented points) come back as lost.
SegmentOutcome segment_capture(const synthcam::LabeledCapture& capture,
                               const percept::RoiNet* roinet, const percept::SegNet* segnet,
                               const TrackerOptions& options);

struct TrackFrameResult {
  bool lost = false;
  std::string lost_reason;
  geom::RigidTransform pose;  // new pose, or the carried last-good pose when lost
  IcpStats stats;
  int segmented_points = 0;
};

/// Stage-B registration of a segmentation outcome: BICP warm-started from
/// prev_pose (first frame: coarse centroid alignment).
TrackFrameResult register_segments(const SegmentOutcome& segments, const ReferenceModel& model,
                                   const Eigen::Vector3d& hip_camera,
                                   const std::optional<geom::RigidTransform>& prev_pose,
                                   const TrackerOptions& options);

/// Whole-frame convenience: segment_capture + register_segments.
TrackFrameResult track_frame(const synthcam::LabeledCapture& capture,
                             const percept::RoiNet* roinet, const percept::SegNet* segnet,
                             const ReferenceModel& model, const Eigen::Vector3d& hip_camera,
                             const std::optional<geom::RigidTransform>& prev_pose,
                             const TrackerOptions& options);

}  // namespace boneloc::reg
