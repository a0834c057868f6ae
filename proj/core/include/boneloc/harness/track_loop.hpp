#pragma once

#include <string>
#include <vector>

#include "boneloc/harness/metrics.hpp"
#include "boneloc/reg/tracker.hpp"

namespace boneloc::harness {

struct TrackLoopOptions {
  bool serial = false;       // run both stages on one thread
  bool latest_wins = false;  // a newer segmentation replaces an unconsumed one
  bool init_gt = false;      // warm-start frame 0 from its gt pose (digitization analog)
  Eigen::Vector3d hip_model{0, 0, 0};
  reg::TrackerOptions tracker;
  int warmup_frames = 10;  // excluded from the timing summary
};

struct FrameRecord {
  int frame = -1;
  geom::RigidTransform pose;
  bool lost = false;
  bool dropped = false;  // skipped by latest-wins before registration
  std::string reason;
  bool has_gt = false;
  double rot_err_deg = 0.0, trans_err_mm = 0.0;
  double stage_a_ms = 0.0, stage_b_ms = 0.0;
};

struct TimingSummary {
  double p50_a_ms = 0.0, p95_a_ms = 0.0;
  double p50_b_ms = 0.0, p95_b_ms = 0.0;
  double p50_frame_ms = 0.0, p95_frame_ms = 0.0;  // per-frame end-to-end cost
  double rate_hz = 0.0;
  int measured_frames = 0;
};

struct TrackLoopReport {
  std::vector<FrameRecord> frames;  // one row per dataset frame, in order
  TimingSummary timing;
  int lost_count = 0;
  int dropped_count = 0;
};

/// Two-stage tracking over a recorded dataset: stage A (acquire + RoI +
/// segmentation) and stage B (BICP) connected by a single-slot hand-off.
/// With latest_wins disabled the pipelined loop is bit-identical to serial.
TrackLoopReport track_loop(const std::string& dataset_dir, const percept::RoiNet* roinet,
                           const percept::SegNet* segnet, const reg::ReferenceModel& model,
                           const TrackLoopOptions& options);

/// CSV: frame, 16 row-major pose entries, rot_err_deg, trans_err_mm, status.
void write_pose_log(const std::string& path, const TrackLoopReport& report);
std::string pose_log_string(const TrackLoopReport& report);

}  // namespace boneloc::harness
