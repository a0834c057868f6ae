#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "boneloc/error.hpp"
#include "boneloc/harness/evaluate.hpp"
#include "boneloc/harness/metrics.hpp"
#include "boneloc/harness/pairwise_label.hpp"
#include "boneloc/harness/track_loop.hpp"
#include "boneloc/rng.hpp"
#include "boneloc/synthcam/anatomy.hpp"
#include "boneloc/synthcam/dataset.hpp"

using namespace boneloc;
using namespace boneloc::harness;

namespace {

constexpr double kDeg = M_PI / 180.0;

std::string temp_dir(const char* tag) {
  const auto dir = std::filesystem::temp_directory_path() / tag;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

struct SeqFixture {
  std::string dir;
  reg::ReferenceModel model;
};

// noise-free smooth 12-frame sequence at probe resolution + matching reference
SeqFixture sequence_fixture(const char* tag, bool with_noise) {
  synthcam::SceneConfig cfg = synthcam::default_scene_config();
  cfg.intrinsics = {132.0, 132.0, 44.0, 36.0, 88, 72};
  cfg.captures_per_scene = 12;
  cfg.smooth_camera = true;
  cfg.occluder_min = cfg.occluder_max = with_noise ? 1 : 0;
  if (!with_noise) {
    cfg.noise.sigma_xy = 0.0;
    cfg.noise.z_scale = 0.0;
    cfg.noise.dropout_enabled = false;
  }
  SeqFixture fx;
  fx.dir = temp_dir(tag);
  synthcam::generate_dataset(cfg, 1, 77, fx.dir);
  Rng rng(500);
  auto cloud = synthcam::sample_surface(synthcam::make_femur_mesh(), 0.8, geom::PartTag::Femur,
                                        synthcam::femur_digitize_y_max(), rng);
  fx.model = reg::ReferenceModel(std::move(cloud), synthcam::femur_hip_center());
  return fx;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("mask iou: identical, disjoint, arithmetic, empty convention, symmetry") {
  std::vector<std::uint8_t> a = {1, 1, 0, 0, 1};
  CHECK(mask_iou(a, a) == 1.0);

  std::vector<std::uint8_t> b = {0, 0, 1, 1, 0};
  CHECK(mask_iou(a, b) == 0.0);

  // TP=8, FP=2, FN=0 -> 0.8
  std::vector<std::uint8_t> pred(16, 0), gt(16, 0);
  for (int i = 0; i < 10; ++i) pred[i] = 1;
  for (int i = 0; i < 8; ++i) gt[i] = 1;
  const SegMetrics m = mask_metrics(pred, gt);
  CHECK(m.tp == 8);
  CHECK(m.fp == 2);
  CHECK(m.fn == 0);
  CHECK(m.iou == doctest::Approx(0.8));
  CHECK(mask_iou(pred, gt) == mask_iou(gt, pred));

  const std::vector<std::uint8_t> empty(4, 0);
  const SegMetrics e = mask_metrics(empty, empty);
  CHECK(e.iou == 1.0);
  CHECK(e.empty_empty);
}

TEST_CASE("roi success: identical, disjoint, shifted-IoU-1/3 counterexample") {
  const geom::RoiRect box{0, 0, 100, 100};
  CHECK(roi_success(box, box));
  CHECK(!roi_success(box, {200, 200, 300, 300}));
  const geom::RoiRect shifted{50, 0, 150, 100};
  CHECK(geom::rect_iou(box, shifted) == doctest::Approx(1.0 / 3.0));
  CHECK(!roi_success(shifted, box));
}

TEST_CASE("pose error: zero at equality, 3-4-5 translation, composed rotation, left-invariance") {
  Rng rng(3);
  const auto p = geom::RigidTransform::from_axis_angle({0.3, -1, 2}, 0.7, {10, 20, 30});
  const PoseError zero = pose_error(p, p);
  CHECK(zero.rot_deg < 1e-9);
  CHECK(zero.trans_mm < 1e-9);

  const auto shifted = geom::compose(p, geom::RigidTransform::from_translation({1, 2, 2}));
  const PoseError t = pose_error(shifted, p);
  CHECK(t.rot_deg < 1e-9);
  CHECK(t.trans_mm == doctest::Approx(3.0));

  const auto rz = geom::RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), 2.0 * kDeg);
  const PoseError r = pose_error(geom::compose(p, rz), p);
  CHECK(r.rot_deg == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.trans_mm < 1e-9);  // rotation about the gt-frame origin

  // pre-composing both poses by a common transform leaves the error unchanged
  const auto common = geom::RigidTransform::from_axis_angle({1, 1, 0}, 0.4, {-5, 9, 2});
  const PoseError before = pose_error(shifted, p);
  const PoseError after = pose_error(geom::compose(common, shifted), geom::compose(common, p));
  CHECK(after.rot_deg == doctest::Approx(before.rot_deg).epsilon(1e-9));
  CHECK(after.trans_mm == doctest::Approx(before.trans_mm).epsilon(1e-9));
}

TEST_CASE("gt surface transform: identity chain, single link, inverse round-trip") {
  Rng rng(4);
  geom::PointCloud cloud;
  for (int i = 0; i < 100; ++i)
    cloud.points.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)});

  const std::vector<geom::RigidTransform> identity_chain(3);
  const auto same = gt_surface_transform(cloud, identity_chain);
  for (size_t i = 0; i < cloud.size(); ++i) CHECK(same.points[i] == cloud.points[i]);

  const auto link = geom::RigidTransform::from_axis_angle({0, 1, 0}, 0.5, {5, 6, 7});
  const std::vector<geom::RigidTransform> single = {link};
  const auto moved = gt_surface_transform(cloud, single);
  for (size_t i = 0; i < cloud.size(); ++i)
    CHECK((moved.points[i] - link.apply(cloud.points[i])).norm() < 1e-12);

  const std::vector<geom::RigidTransform> chain = {
      geom::RigidTransform::from_axis_angle({1, 2, 3}, 0.8, {10, 0, -4}), link};
  const std::vector<geom::RigidTransform> inverse_chain = {geom::invert(link),
                                                           geom::invert(chain[0])};
  const auto round = gt_surface_transform(gt_surface_transform(cloud, chain), inverse_chain);
  for (size_t i = 0; i < cloud.size(); ++i)
    CHECK((round.points[i] - cloud.points[i]).norm() < 1e-9);
}

TEST_CASE("hsv conversion and band membership") {
  const Hsv purple = rgb_to_hsv(128, 0, 128);
  CHECK(purple.h == doctest::Approx(300.0));
  CHECK(purple.s == doctest::Approx(1.0));
  CHECK(purple.v == doctest::Approx(128.0 / 255.0));

  HsvBand band;  // default [260, 320], s >= 0.3, v >= 0.2
  CHECK(band.contains(purple.h, purple.s, purple.v));
  CHECK(!band.contains(100.0, 1.0, 1.0));
  CHECK(!band.contains(300.0, 0.1, 1.0));

  HsvBand wrap{350.0, 10.0, 0.0, 0.0};
  CHECK(wrap.contains(355.0, 1, 1));
  CHECK(wrap.contains(5.0, 1, 1));
  CHECK(!wrap.contains(180.0, 1, 1));
}

TEST_CASE("pairwise label: no purple leaves mask, painted occluder subtracts exactly") {
  Rng rng(5);
  const int w = 40, h = 30;
  std::vector<std::uint8_t> mask(size_t(w) * h, 0);
  for (int y = 8; y < 22; ++y)
    for (int x = 10; x < 30; ++x) mask[size_t(y) * w + x] = 1;

  geom::RgbFrame frame2(w, h);
  for (int i = 0; i < w * h; ++i) {
    frame2.rgb[3 * i + 0] = 200;  // warm bone-ish color, far from purple
    frame2.rgb[3 * i + 1] = 180;
    frame2.rgb[3 * i + 2] = 150;
  }
  HsvBand band;
  const PairwiseLabel unchanged = pairwise_label(mask, frame2, band);
  CHECK(unchanged.femur_mask == mask);
  CHECK(unchanged.removed_pixels == 0);

  // paint k mask pixels purple -> output count = original - k exactly
  int k = 0;
  for (int y = 10; y < 14; ++y) {
    for (int x = 12; x < 22; ++x) {
      std::uint8_t* px = frame2.at(x, y);
      px[0] = 128;
      px[1] = 0;
      px[2] = 128;
      ++k;
    }
  }
  const PairwiseLabel painted = pairwise_label(mask, frame2, band);
  int before = 0, after = 0;
  for (auto m : mask) before += m;
  for (auto m : painted.femur_mask) after += m;
  CHECK(after == before - k);
  CHECK(painted.removed_pixels == k);
  // output is a subset of frame 1's mask
  for (size_t i = 0; i < mask.size(); ++i)
    if (painted.femur_mask[i]) CHECK(mask[i] == 1);

  // fully painted -> error
  for (int y = 8; y < 22; ++y)
    for (int x = 10; x < 30; ++x) {
      std::uint8_t* px = frame2.at(x, y);
      px[0] = 128;
      px[1] = 0;
      px[2] = 128;
    }
  CHECK_THROWS_AS(pairwise_label(mask, frame2, band), Error);
}

TEST_CASE("track loop: oracle-mask serial run tracks a noise-free sequence") {
  const SeqFixture fx = sequence_fixture("boneloc_seq_clean", false);
  TrackLoopOptions opt;
  opt.serial = true;
  opt.init_gt = true;
  opt.hip_model = fx.model.hip_center;
  opt.tracker.oracle_mask = true;
  opt.tracker.n_points = 1200;
  opt.tracker.icp.min_points = 60;

  const TrackLoopReport report = track_loop(fx.dir, nullptr, nullptr, fx.model, opt);
  REQUIRE(int(report.frames.size()) == 12);  // one row per frame
  for (const auto& rec : report.frames) {
    CHECK(!rec.dropped);
    if (!rec.lost) {
      // coarse probe resolution; the acceptance suite checks precision at
      // full scale
      CHECK(rec.rot_err_deg < 3.0);
      CHECK(rec.trans_err_mm < 2.0);
    }
  }
  CHECK(report.lost_count <= 2);
}

TEST_CASE("track loop: pipelined without latest-wins is bit-identical to serial") {
  const SeqFixture fx = sequence_fixture("boneloc_seq_pipe", true);
  TrackLoopOptions opt;
  opt.init_gt = true;
  opt.hip_model = fx.model.hip_center;
  opt.tracker.oracle_mask = true;
  opt.tracker.n_points = 800;
  opt.tracker.icp.min_points = 50;

  TrackLoopOptions serial = opt;
  serial.serial = true;
  const TrackLoopReport a = track_loop(fx.dir, nullptr, nullptr, fx.model, serial);

  TrackLoopOptions piped = opt;
  piped.serial = false;
  piped.latest_wins = false;
  const TrackLoopReport b = track_loop(fx.dir, nullptr, nullptr, fx.model, piped);

  CHECK(pose_log_string(a) == pose_log_string(b));  // bitwise-identical pose logs
  CHECK(b.dropped_count == 0);
}

TEST_CASE("evaluate: counts partition and report files are written") {
  synthcam::SceneConfig cfg = synthcam::default_scene_config();
  cfg.intrinsics = {96.0, 96.0, 32.0, 32.0, 64, 64};
  cfg.captures_per_scene = 3;
  cfg.occluder_max = 2;
  const std::string dir = temp_dir("boneloc_eval_ds");
  synthcam::generate_dataset(cfg, 2, 11, dir);

  Rng rng(501);
  auto cloud = synthcam::sample_surface(synthcam::make_femur_mesh(), 1.2, geom::PartTag::Femur,
                                        synthcam::femur_digitize_y_max(), rng);
  const reg::ReferenceModel model(std::move(cloud), synthcam::femur_hip_center());

  percept::RoiNet roi(percept::RoiNetConfig{}, 1);
  percept::SegNet seg(percept::SegNetConfig{}, 2);
  EvalOptions opt;
  opt.hip_model = model.hip_center;
  opt.n_points = 600;
  opt.icp.min_points = 60;

  const EvalReport report = evaluate(dir, &roi, &seg, model, opt);
  CHECK(report.occluded_count + report.unoccluded_count == 6);
  CHECK(int(report.frames.size()) == 6);
  CHECK(report.roi_success_rate >= 0.0);
  CHECK(report.roi_success_rate <= 1.0);

  const std::string out = temp_dir("boneloc_eval_out");
  write_eval_json(out + "/report.json", report);
  write_eval_csv(out + "/report.csv", report);
  std::ifstream js(out + "/report.json");
  const std::string body((std::istreambuf_iterator<char>(js)),
                         std::istreambuf_iterator<char>());
  CHECK(body.find("\"RoI\"") != std::string::npos);
  CHECK(body.find("\"Seg\"") != std::string::npos);
  CHECK(body.find("\"RoI+Seg\"") != std::string::npos);
  CHECK(body.find("\"pose\"") != std::string::npos);
  CHECK(body.find("occluded") != std::string::npos);
}

TEST_SUITE_END();
