#include "boneloc/reg/tracker.hpp"

#include "boneloc/error.hpp"
#include "boneloc/percept/crop.hpp"
#include "boneloc/percept/trainer.hpp"

namespace boneloc::reg {

namespace {

std::vector<std::uint8_t> erode_mask(const std::vector<std::uint8_t>& mask, int width,
                                     int height, int radius) {
  std::vector<std::uint8_t> out(mask.size(), 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t idx = std::size_t(y) * width + x;
      if (!mask[idx]) continue;
      bool keep = true;
      for (int dy = -radius; dy <= radius && keep; ++dy) {
        for (int dx = -radius; dx <= radius && keep; ++dx) {
          const int nx = x + dx, ny = y + dy;
          keep = nx >= 0 && nx < width && ny >= 0 && ny < height &&
                 mask[std::size_t(ny) * width + nx];
        }
      }
      out[idx] = keep ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

SegmentOutcome segment_capture(const synthcam::LabeledCapture& capture,
                               const percept::RoiNet* roinet, const percept::SegNet* segnet,
                               const TrackerOptions& options) {
  SegmentOutcome out;
  auto lost = [&](const std::string& reason) {
    out.lost = true;
    out.lost_reason = reason;
    return out;
  };

  geom::RoiRect roi;
  if (options.oracle_mask) {
    roi = capture.roi_gt;
    if (roi.degenerate()) return lost("no roi");
  } else {
    try {
      roi = roinet->predict(capture.rgb);
    } catch (const Error& e) {
      return lost(e.kind());
    }
  }

  percept::SegSample sample;
  try {
    sample = percept::crop_and_resample(capture.depth, roi, capture.intrinsics,
                                        options.n_points, percept::crop_seed(capture.seed));
  } catch (const Error& e) {
    return lost(e.kind());
  }

  if (options.oracle_mask) {
    const std::vector<std::uint8_t>* mask = &capture.femur_mask;
    std::vector<std::uint8_t> eroded;
    if (options.oracle_erode_px > 0) {
      eroded = erode_mask(capture.femur_mask, capture.depth.width, capture.depth.height,
                          options.oracle_erode_px);
      mask = &eroded;
    }
    for (size_t i = 0; i < sample.centered.size(); ++i)
      if ((*mask)[size_t(sample.source_pixel[i])])
        out.femur.points.push_back(sample.centered.points[i] + sample.centroid);
  } else {
    const auto seg = segnet->forward(sample.centered);
    for (int idx : seg.femur_indices)
      out.femur.points.push_back(sample.centered.points[size_t(idx)] + sample.centroid);
  }
  if (out.femur.size() < size_t(options.icp.min_points)) return lost("too few points");
  return out;
}

TrackFrameResult register_segments(const SegmentOutcome& segments, const ReferenceModel& model,
                                   const Eigen::Vector3d& hip_camera,
                                   const std::optional<geom::RigidTransform>& prev_pose,
                                   const TrackerOptions& options) {
  TrackFrameResult result;
  if (prev_pose) result.pose = *prev_pose;
  if (segments.lost) {
    result.lost = true;
    result.lost_reason = segments.lost_reason;
    return result;
  }
  result.segmented_points = int(segments.femur.size());

  geom::RigidTransform init =
      prev_pose ? *prev_pose
                : geom::RigidTransform::from_translation(segments.femur.centroid() -
                                                         model.surface.centroid());
  if (options.axial_scan_deg > 0.0 && prev_pose) {
    const Eigen::Vector3d axis =
        (model.hip_center - model.surface.centroid()).normalized();
    double best_rms = surface_rms(segments.femur, model, init);
    geom::RigidTransform best_init = init;
    for (double a = -options.axial_scan_deg; a <= options.axial_scan_deg + 1e-12;
         a += options.axial_scan_step_deg) {
      if (std::abs(a) < 1e-12) continue;
      const auto candidate =
          geom::compose(init, geom::RigidTransform::from_axis_angle(axis, a * M_PI / 180.0));
      const double rms = surface_rms(segments.femur, model, candidate);
      if (rms < best_rms) {
        best_rms = rms;
        best_init = candidate;
      }
    }
    init = best_init;
  }
  HipConstraint hip;
  hip.hip_model = model.hip_center;
  hip.hip_camera = hip_camera;
  hip.weight = options.hip_weight;

  IcpResult best = bicp(segments.femur, model, hip, init, options.icp, options.mode);
  if (options.axial_restarts > 0) {
    const Eigen::Vector3d axis =
        (model.hip_center - model.surface.centroid()).normalized();
    for (int k = 1; k <= options.axial_restarts; ++k) {
      const double angle =
          options.restart_step_deg * M_PI / 180.0 * ((k + 1) / 2) * (k % 2 == 1 ? 1.0 : -1.0);
      const auto jittered =
          geom::compose(init, geom::RigidTransform::from_axis_angle(axis, angle));
      const IcpResult trial =
          bicp(segments.femur, model, hip, jittered, options.icp, options.mode);
      if (trial.stats.rms_all_mm < best.stats.rms_all_mm) best = trial;
    }
  }
  result.pose = best.pose;
  result.stats = best.stats;
  return result;
}

TrackFrameResult track_frame(const synthcam::LabeledCapture& capture,
                             const percept::RoiNet* roinet, const percept::SegNet* segnet,
                             const ReferenceModel& model, const Eigen::Vector3d& hip_camera,
                             const std::optional<geom::RigidTransform>& prev_pose,
                             const TrackerOptions& options) {
  return register_segments(segment_capture(capture, roinet, segnet, options), model, hip_camera,
                           prev_pose, options);
}

}  // namespace boneloc::reg
