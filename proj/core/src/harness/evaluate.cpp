#include "boneloc/harness/evaluate.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "boneloc/error.hpp"
#include "boneloc/percept/crop.hpp"
#include "boneloc/percept/trainer.hpp"
#include "boneloc/rng.hpp"

namespace boneloc::harness {

namespace {

struct CropIou {
  double iou = 0.0;
  bool empty_empty = false;
  geom::PointCloud femur;  // camera frame, thresholded points
};

CropIou crop_iou(const synthcam::LabeledCapture& cap, const geom::RoiRect& roi,
                 const percept::SegNet* segnet, const EvalOptions& opt) {
  CropIou out;
  percept::SegSample sample;
  try {
    sample = percept::crop_and_resample(cap.depth, roi, cap.intrinsics, opt.n_points,
                                        percept::crop_seed(cap.seed));
  } catch (const Error&) {
    return out;  // empty crop counts as IoU 0
  }
  const auto seg = segnet->forward(sample.centered);
  std::vector<std::uint8_t> pred(sample.centered.size()), gt(sample.centered.size());
  for (size_t i = 0; i < sample.centered.size(); ++i) {
    pred[i] = seg.probabilities[i] > opt.tau ? 1 : 0;
    gt[i] = cap.femur_mask[size_t(sample.source_pixel[i])];
    if (pred[i])
      out.femur.points.push_back(sample.centered.points[i] + sample.centroid);
  }
  const SegMetrics m = mask_metrics(pred, gt);
  out.iou = m.iou;
  out.empty_empty = m.empty_empty;
  return out;
}

geom::RigidTransform perturbed_init(const geom::RigidTransform& gt, double rot_deg,
                                    double trans_mm, Rng& rng) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  if (axis.norm() < 1e-9) axis = Eigen::Vector3d::UnitX();
  Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
  if (dir.norm() < 1e-9) dir = Eigen::Vector3d::UnitY();
  const auto delta = geom::RigidTransform::from_axis_angle(
      axis, rot_deg * M_PI / 180.0, dir.normalized() * trans_mm);
  return geom::compose(gt, delta);
}

nlohmann::json agg_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"std", a.stddev}, {"count", a.count}};
}

}  // namespace

EvalReport evaluate(const std::string& dataset_dir, const percept::RoiNet* roinet,
                    const percept::SegNet* segnet, const reg::ReferenceModel& model,
                    const EvalOptions& opt) {
  const auto manifest = synthcam::load_manifest(dataset_dir);
  if (manifest.captures.empty()) fail("empty dataset", "evaluate: no captures");

  EvalReport report;
  std::vector<double> seg_vals, roiseg_vals;
  std::vector<double> rot_all, trans_all, rot_occ, trans_occ, rot_unocc, trans_unocc;
  int roi_hits = 0;
  Rng rng(opt.seed);

  for (const auto& entry : manifest.captures) {
    const auto cap = synthcam::read_capture(dataset_dir + "/" + entry.dir);
    FrameEval fe;
    fe.dir = entry.dir;
    fe.occluded = cap.occluded;
    (fe.occluded ? report.occluded_count : report.unoccluded_count) += 1;

    geom::RoiRect pred_roi;
    bool have_roi = false;
    try {
      pred_roi = roinet->predict(cap.rgb);
      have_roi = true;
    } catch (const Error&) {
    }
    if (have_roi) {
      fe.roi_iou = geom::rect_iou(pred_roi, cap.roi_gt);
      fe.roi_ok = roi_success(pred_roi, cap.roi_gt);
    }
    roi_hits += fe.roi_ok ? 1 : 0;

    const CropIou seg_gt_roi = crop_iou(cap, cap.roi_gt, segnet, opt);
    fe.seg_iou = seg_gt_roi.iou;
    seg_vals.push_back(fe.seg_iou);

    CropIou end_to_end;
    if (have_roi) end_to_end = crop_iou(cap, pred_roi, segnet, opt);
    fe.roiseg_iou = end_to_end.iou;
    roiseg_vals.push_back(fe.roiseg_iou);
    fe.seg_empty_flag = seg_gt_roi.empty_empty || end_to_end.empty_empty;
    report.empty_iou_count += fe.seg_empty_flag ? 1 : 0;

    if (opt.with_pose) {
      const geom::PointCloud& femur = end_to_end.femur;
      if (femur.size() >= size_t(opt.icp.min_points)) {
        reg::HipConstraint hip;
        hip.hip_model = model.hip_center;
        hip.hip_camera = cap.pose_gt.apply(opt.hip_model);
        const auto init = perturbed_init(cap.pose_gt, opt.init_rot_deg, opt.init_trans_mm, rng);
        const auto res = reg::bicp(femur, model, hip, init, opt.icp, opt.mode);
        const PoseError err = pose_error(res.pose, cap.pose_gt);
        fe.pose_valid = true;
        fe.rot_err_deg = err.rot_deg;
        fe.trans_err_mm = err.trans_mm;
        rot_all.push_back(err.rot_deg);
        trans_all.push_back(err.trans_mm);
        (fe.occluded ? rot_occ : rot_unocc).push_back(err.rot_deg);
        (fe.occluded ? trans_occ : trans_unocc).push_back(err.trans_mm);
      } else {
        ++report.pose_failures;
      }
    }
    report.frames.push_back(std::move(fe));
  }

  report.roi_success_rate = double(roi_hits) / double(manifest.captures.size());
  report.seg_iou = aggregate(seg_vals);
  report.roiseg_iou = aggregate(roiseg_vals);
  report.rot_all = aggregate(rot_all);
  report.trans_all = aggregate(trans_all);
  report.rot_occ = aggregate(rot_occ);
  report.trans_occ = aggregate(trans_occ);
  report.rot_unocc = aggregate(rot_unocc);
  report.trans_unocc = aggregate(trans_unocc);
  return report;
}

void write_eval_json(const std::string& path, const EvalReport& report) {
  nlohmann::json j;
  j["RoI"] = report.roi_success_rate;
  j["Seg"] = agg_json(report.seg_iou);
  j["RoI+Seg"] = agg_json(report.roiseg_iou);
  j["pose"] = {{"all", {{"rot_deg", agg_json(report.rot_all)},
                        {"trans_mm", agg_json(report.trans_all)}}},
               {"occluded", {{"rot_deg", agg_json(report.rot_occ)},
                             {"trans_mm", agg_json(report.trans_occ)}}},
               {"unoccluded", {{"rot_deg", agg_json(report.rot_unocc)},
                               {"trans_mm", agg_json(report.trans_unocc)}}}};
  j["occluded_count"] = report.occluded_count;
  j["unoccluded_count"] = report.unoccluded_count;
  j["empty_iou_count"] = report.empty_iou_count;
  j["pose_failures"] = report.pose_failures;
  std::ofstream os(path);
  if (!os) fail("io", "cannot write report " + path);
  os << j.dump(2) << "\n";
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
  std::ofstream os(path);
  if (!os) fail("io", "cannot write report " + path);
  os << "RoI,Seg,RoI+Seg\n";
  os << report.roi_success_rate << "," << report.seg_iou.mean << "+-" << report.seg_iou.stddev
     << "," << report.roiseg_iou.mean << "+-" << report.roiseg_iou.stddev << "\n";
  os << "pose_split,rot_mean_deg,rot_std_deg,trans_mean_mm,trans_std_mm,count\n";
  os << "occluded," << report.rot_occ.mean << "," << report.rot_occ.stddev << ","
     << report.trans_occ.mean << "," << report.trans_occ.stddev << "," << report.rot_occ.count
     << "\n";
  os << "unoccluded," << report.rot_unocc.mean << "," << report.rot_unocc.stddev << ","
     << report.trans_unocc.mean << "," << report.trans_unocc.stddev << ","
     << report.rot_unocc.count << "\n";
  os << "frame,occluded,roi_iou,roi_ok,seg_iou,roiseg_iou,rot_err_deg,trans_err_mm,pose_valid\n";
  for (const auto& f : report.frames) {
    os << f.dir << "," << f.occluded << "," << f.roi_iou << "," << f.roi_ok << "," << f.seg_iou
       << "," << f.roiseg_iou << "," << f.rot_err_deg << "," << f.trans_err_mm << ","
       << f.pose_valid << "\n";
  }
}

}  // namespace boneloc::harness
