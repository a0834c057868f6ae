#pragma once

#include <string>
#include <vector>

#include "boneloc/harness/metrics.hpp"
#include "boneloc/reg/tracker.hpp"

namespace boneloc::harness {

struct EvalOptions {
  int n_points = 2000;
  double tau = 0.8;
  Eigen::Vector3d hip_model{0, 0, 0};
  reg::IcpParams icp;
  reg::BicpMode mode = reg::BicpMode::Weighted;
  bool with_pose = true;
  // registration starts from gt perturbed by this much (the desk-scale
  // stand-in for the previous-frame warm start)
  double init_rot_deg = 2.0;
  double init_trans_mm = 5.0;
  std::uint64_t seed = 7;
};

struct FrameEval {
  std::string dir;
  bool occluded = false;
  double roi_iou = 0.0;
  bool roi_ok = false;
  double seg_iou = 0.0;     // segmentation on the gt RoI crop
  double roiseg_iou = 0.0;  // end-to-end: predicted RoI crop
  bool seg_empty_flag = false;
  bool pose_valid = false;
  double rot_err_deg = 0.0, trans_err_mm = 0.0;
};

struct EvalReport {
  double roi_success_rate = 0.0;
  Aggregate seg_iou, roiseg_iou;
  Aggregate rot_all, trans_all;
  Aggregate rot_occ, trans_occ, rot_unocc, trans_unocc;
  int occluded_count = 0, unoccluded_count = 0;
  int empty_iou_count = 0;  // frames where the IoU-of-empty convention fired
  int pose_failures = 0;
  std::vector<FrameEval> frames;
};

/// Table-1-style evaluation on a labelled held-out set: RoI success rate,
/// Seg IoU on gt RoIs, end-to-end RoI+Seg IoU, and BICP pose error split by
/// the generator's occluded/unoccluded metadata.
EvalReport evaluate(const std::string& dataset_dir, const percept::RoiNet* roinet,
                    const percept::SegNet* segnet, const reg::ReferenceModel& model,
                    const EvalOptions& options);

void write_eval_json(const std::string& path, const EvalReport& report);
void write_eval_csv(const std::string& path, const EvalReport& report);

}  // namespace boneloc::harness
