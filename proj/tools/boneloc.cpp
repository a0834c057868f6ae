// boneloc: synthetic RGB-D knee captures, two-stage segmentation training,
// and hip-bounded ICP pose tracking from the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "boneloc/error.hpp"
#include "boneloc/harness/evaluate.hpp"
#include "boneloc/harness/pairwise_label.hpp"
#include "boneloc/harness/track_loop.hpp"
#include "boneloc/percept/trainer.hpp"
#include "boneloc/reg/reference_model.hpp"
#include "boneloc/reg/tracker.hpp"
#include "boneloc/synthcam/anatomy.hpp"
#include "boneloc/synthcam/dataset.hpp"
#include "boneloc/synthcam/image_io.hpp"
#include "boneloc/synthcam/noise.hpp"
#include "boneloc/synthcam/renderer.hpp"
#include "boneloc/percept/crop.hpp"

namespace {

using namespace boneloc;

constexpr std::uint64_t kReferenceSeed = 0xb02e;  // fixed: the "pre-scanned" model

struct GenArgs {
  int scenes = 10;
  int per_scene = 20;
  std::uint64_t seed = 1;
  std::string out;
  bool no_dropout = false, no_noise = false, no_occluders = false, smooth = false;
  double ref_spacing = 0.55;
  std::string polar, dist;
};

void parse_interval(const std::string& text, synthcam::Interval* out, const char* what) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail("bad argument", std::string(what) + ": expected lo:hi");
  out->lo = std::stod(text.substr(0, colon));
  out->hi = std::stod(text.substr(colon + 1));
}

Eigen::Vector3d parse_vec3(const std::string& text) {
  Eigen::Vector3d v;
  size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const size_t comma = text.find(',', pos);
    const std::string part =
        comma == std::string::npos ? text.substr(pos) : text.substr(pos, comma - pos);
    v[i] = std::stod(part);
    pos = comma == std::string::npos ? text.size() : comma + 1;
  }
  return v;
}

int cmd_gen_data(const GenArgs& args) {
  synthcam::SceneConfig cfg = synthcam::default_scene_config();
  cfg.captures_per_scene = args.per_scene;
  cfg.smooth_camera = args.smooth;
  cfg.reference_spacing_mm = args.ref_spacing;
  if (args.no_dropout || args.no_noise) cfg.noise.dropout_enabled = false;
  if (args.no_noise) {
    cfg.noise.sigma_xy = 0.0;
    cfg.noise.z_scale = 0.0;
  }
  if (args.no_occluders) cfg.occluder_min = cfg.occluder_max = 0;
  if (!args.polar.empty()) parse_interval(args.polar, &cfg.track_polar_deg, "--polar");
  if (!args.dist.empty()) parse_interval(args.dist, &cfg.camera_distance_mm, "--dist");

  const auto manifest = synthcam::generate_dataset(cfg, args.scenes, args.seed, args.out);

  // emit the fixed "pre-scanned" reference next to the dataset
  Rng ref_rng(kReferenceSeed);
  auto cloud = synthcam::sample_surface(cfg.femur, cfg.reference_spacing_mm,
                                        geom::PartTag::Femur, synthcam::femur_digitize_y_max(),
                                        ref_rng);
  const reg::ReferenceModel reference(std::move(cloud), synthcam::femur_hip_center());
  reg::save_reference(args.out + "/" + manifest.reference, reference);

  std::cout << "wrote " << manifest.captures.size() << " captures + " << manifest.reference
            << " (" << reference.surface.size() << " pts) to " << args.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string data, out, log;
  int epochs = 8;
  std::uint64_t seed = 1;
  double lr = 1e-3, decay = 0.95;
  int batch = 0;
  bool no_midlayer = false;
  int points = 2000;
  int max_captures = 0;
};

int cmd_train(const TrainArgs& args, bool roi) {
  percept::TrainOptions opt;
  opt.epochs = args.epochs;
  opt.seed = args.seed;
  opt.base_lr = args.lr;
  opt.lr_decay = args.decay;
  opt.batch_size = args.batch;
  opt.midlayer = !args.no_midlayer;
  opt.n_points = args.points;
  opt.model_out = args.out;
  opt.log_csv = args.log;
  opt.max_captures = args.max_captures;

  const auto t0 = std::chrono::steady_clock::now();
  const percept::TrainResult result =
      roi ? percept::train_roinet(args.data, opt) : percept::train_segnet(args.data, opt);
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  for (const auto& e : result.epochs)
    std::cout << "epoch " << e.epoch << " train " << e.train_loss << " val " << e.val_loss
              << " metric " << e.metric << "\n";
  std::cout << "best epoch " << result.best_epoch << " (val " << result.best_val_loss << "), "
            << minutes << " min, model -> " << args.out << "\n";
  return 0;
}

int cmd_infer(const std::string& model_path, const std::string& frame_dir) {
  const auto file = nn::load_model(model_path);
  const auto cap = synthcam::read_capture(frame_dir);
  if (file.kind == "roinet") {
    const auto net = percept::RoiNet::from_model_file(file);
    const geom::RoiRect box = net.predict(cap.rgb);
    std::cout << "roi [" << box.x0 << ", " << box.y0 << ", " << box.x1 << ", " << box.y1 << "]";
    if (!cap.roi_gt.degenerate())
      std::cout << " iou_vs_gt " << geom::rect_iou(box, cap.roi_gt);
    std::cout << "\n";
  } else if (file.kind == "segnet") {
    const auto net = percept::SegNet::from_model_file(file);
    const auto sample = percept::crop_and_resample(cap.depth, cap.roi_gt, cap.intrinsics, 2000,
                                                   percept::crop_seed(cap.seed));
    const auto seg = net.forward(sample.centered);
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < seg.probabilities.size(); ++i) {
      const bool pred = seg.probabilities[i] > seg.tau;
      const bool gt = cap.femur_mask[size_t(sample.source_pixel[i])] != 0;
      tp += pred && gt;
      fp += pred && !gt;
      fn += !pred && gt;
    }
    const double iou = tp + fp + fn == 0 ? 1.0 : double(tp) / double(tp + fp + fn);
    std::cout << "segmented " << seg.femur_indices.size() << "/" << seg.probabilities.size()
              << " points, iou_vs_gt " << iou << "\n";
  } else {
    fail("bad model file", "unknown model kind " + file.kind);
  }
  return 0;
}

struct TrackArgs {
  std::string data, roi_model, seg_model, ref, out, timing;
  std::string hip;
  bool serial = false, oracle = false, latest_wins = false, init_gt = false;
  int points = 2000, restarts = 0, max_iter = 50;
  double scan = 0.0;
  bool pinned = false;
};

int cmd_track(const TrackArgs& args) {
  const reg::ReferenceModel model = reg::load_reference(args.ref);
  const Eigen::Vector3d hip = args.hip.empty() ? model.hip_center : parse_vec3(args.hip);

  std::optional<percept::RoiNet> roinet;
  std::optional<percept::SegNet> segnet;
  if (!args.oracle) {
    roinet = percept::RoiNet::from_model_file(nn::load_model(args.roi_model));
    segnet = percept::SegNet::from_model_file(nn::load_model(args.seg_model));
  }

  harness::TrackLoopOptions opt;
  opt.serial = args.serial;
  opt.latest_wins = args.latest_wins;
  opt.init_gt = args.init_gt;
  opt.hip_model = hip;
  opt.tracker.oracle_mask = args.oracle;
  opt.tracker.n_points = args.points;
  opt.tracker.axial_restarts = args.restarts;
  opt.tracker.axial_scan_deg = args.scan;
  opt.tracker.icp.max_iterations = args.max_iter;
  if (args.pinned) opt.tracker.mode = reg::BicpMode::Pinned;

  const auto report = harness::track_loop(args.data, roinet ? &*roinet : nullptr,
                                          segnet ? &*segnet : nullptr, model, opt);
  harness::write_pose_log(args.out, report);

  nlohmann::json timing;
  timing["p50_stage_a_ms"] = report.timing.p50_a_ms;
  timing["p95_stage_a_ms"] = report.timing.p95_a_ms;
  timing["p50_stage_b_ms"] = report.timing.p50_b_ms;
  timing["p95_stage_b_ms"] = report.timing.p95_b_ms;
  timing["p50_frame_ms"] = report.timing.p50_frame_ms;
  timing["p95_frame_ms"] = report.timing.p95_frame_ms;
  timing["rate_hz"] = report.timing.rate_hz;
  timing["measured_frames"] = report.timing.measured_frames;
  timing["lost"] = report.lost_count;
  timing["dropped"] = report.dropped_count;
  if (!args.timing.empty()) {
    std::ofstream os(args.timing);
    os << timing.dump(2) << "\n";
  }
  std::cout << report.frames.size() << " frames, " << report.lost_count << " lost, "
            << report.dropped_count << " dropped, p50 " << report.timing.p50_frame_ms
            << " ms/frame, " << report.timing.rate_hz << " Hz -> " << args.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string data, roi_model, seg_model, ref, out, csv;
  std::string hip;
  int points = 2000;
  bool no_pose = false;
};

int cmd_eval(const EvalArgs& args) {
  const reg::ReferenceModel model = reg::load_reference(args.ref);
  const auto roinet = percept::RoiNet::from_model_file(nn::load_model(args.roi_model));
  const auto segnet = percept::SegNet::from_model_file(nn::load_model(args.seg_model));

  harness::EvalOptions opt;
  opt.hip_model = args.hip.empty() ? model.hip_center : parse_vec3(args.hip);
  opt.n_points = args.points;
  opt.with_pose = !args.no_pose;

  const auto report = harness::evaluate(args.data, &roinet, &segnet, model, opt);
  harness::write_eval_json(args.out, report);
  if (!args.csv.empty()) harness::write_eval_csv(args.csv, report);
  std::cout << "RoI " << report.roi_success_rate << "  Seg " << report.seg_iou.mean << "+-"
            << report.seg_iou.stddev << "  RoI+Seg " << report.roiseg_iou.mean << "+-"
            << report.roiseg_iou.stddev << "\n";
  std::cout << "pose occ " << report.rot_occ.mean << " deg / " << report.trans_occ.mean
            << " mm  unocc " << report.rot_unocc.mean << " deg / " << report.trans_unocc.mean
            << " mm -> " << args.out << "\n";
  return 0;
}

int cmd_label_pairwise(const std::string& frame1, const std::string& frame2,
                       const std::string& band_text, double sat_min, double val_min,
                       std::string out) {
  const auto cap1 = synthcam::read_capture(frame1);
  const auto rgb2 = synthcam::read_ppm(frame2 + "/rgb.ppm");
  harness::HsvBand band;
  if (!band_text.empty()) {
    const auto colon = band_text.find(':');
    if (colon == std::string::npos) fail("bad argument", "--band: expected lo:hi degrees");
    band.hue_lo_deg = std::stod(band_text.substr(0, colon));
    band.hue_hi_deg = std::stod(band_text.substr(colon + 1));
  }
  band.sat_min = sat_min;
  band.val_min = val_min;

  const auto label = harness::pairwise_label(cap1.femur_mask, rgb2, band);
  if (out.empty()) out = frame2 + "/pairwise_mask.pgm";
  synthcam::write_mask_pgm(out, label.femur_mask, rgb2.width, rgb2.height);
  std::cout << "removed " << label.removed_pixels << " foreground px, roi [" << label.roi_gt.x0
            << ", " << label.roi_gt.y0 << ", " << label.roi_gt.x1 << ", " << label.roi_gt.y1
            << "] -> " << out << "\n";
  return 0;
}

int cmd_bench() {
  using Clock = std::chrono::steady_clock;
  auto time_ms = [](auto&& fn, int reps) {
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
  };

  synthcam::SceneConfig cfg = synthcam::default_scene_config();
  const auto scene = synthcam::randomize_scene(cfg, 99);
  const synthcam::RenderContext ctx(scene, cfg.intrinsics);

  synthcam::RenderResult rendered;
  std::cout << "render 320x180            " << time_ms([&] { rendered = render(ctx); }, 3)
            << " ms\n";
  std::cout << "dropout 320x180           "
            << time_ms([&] { simulate_dropout(ctx, rendered.depth); }, 3) << " ms\n";
  geom::DepthFrame noisy;
  std::cout << "inject_noise 320x180      "
            << time_ms([&] { noisy = inject_noise(rendered.depth, cfg.noise, 4); }, 5)
            << " ms\n";

  percept::RoiNet roinet(percept::RoiNetConfig{}, 3);
  const auto input = roinet.prepare_input(rendered.rgb);
  std::cout << "roinet forward            " << time_ms([&] { roinet.forward_canvas(input); }, 5)
            << " ms\n";

  Rng rng(5);
  geom::PointCloud cloud;
  for (int i = 0; i < 2000; ++i)
    cloud.points.push_back({rng.uniform(-60, 60), rng.uniform(-60, 60), rng.uniform(-60, 60)});
  percept::SegNet segnet(percept::SegNetConfig{}, 4);
  std::cout << "segnet forward (N=2000)   " << time_ms([&] { segnet.forward(cloud); }, 5)
            << " ms\n";

  Rng ref_rng(kReferenceSeed);
  auto ref_cloud = synthcam::sample_surface(cfg.femur, 0.55, geom::PartTag::Femur,
                                            synthcam::femur_digitize_y_max(), ref_rng);
  const reg::ReferenceModel model(std::move(ref_cloud), synthcam::femur_hip_center());
  geom::PointCloud patch;
  for (int i = 0; i < 2000; ++i)
    patch.points.push_back(model.surface.points[rng.uniform_index(model.surface.size())]);
  reg::HipConstraint hip;
  hip.hip_model = model.hip_center;
  hip.hip_camera = model.hip_center;
  reg::IcpParams params;
  std::cout << "bicp 2000 pts (identity)  "
            << time_ms(
                   [&] { reg::bicp(patch, model, hip, geom::RigidTransform::identity(), params); },
                   3)
            << " ms\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"markerless femur tracking toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* cmd_gen = app.add_subcommand("gen-data", "generate a synthetic labelled dataset");
  cmd_gen->add_option("--scenes", gen.scenes, "scene count");
  cmd_gen->add_option("--per-scene", gen.per_scene, "captures per scene");
  cmd_gen->add_option("--seed", gen.seed, "master seed");
  cmd_gen->add_option("--out", gen.out, "output directory")->required();
  cmd_gen->add_flag("--no-dropout", gen.no_dropout, "disable projector-shadow dropout");
  cmd_gen->add_flag("--no-noise", gen.no_noise, "disable sampling noise and dropout");
  cmd_gen->add_flag("--no-occluders", gen.no_occluders, "no hands/tools in the scene");
  cmd_gen->add_flag("--smooth-cam", gen.smooth, "smooth camera trajectory per scene");
  cmd_gen->add_option("--ref-spacing", gen.ref_spacing, "reference sampling pitch, mm");
  cmd_gen->add_option("--polar", gen.polar, "smooth-track polar band, deg lo:hi");
  cmd_gen->add_option("--dist", gen.dist, "camera distance band, mm lo:hi");

  TrainArgs train_roi, train_seg;
  for (auto [sub, args] :
       {std::pair{"train-roi", &train_roi}, std::pair{"train-seg", &train_seg}}) {
    auto* c = app.add_subcommand(sub, std::string("train ") + sub + " on a dataset");
    c->add_option("--data", args->data, "dataset directory")->required();
    c->add_option("--epochs", args->epochs, "training epochs");
    c->add_option("--seed", args->seed, "training seed");
    c->add_option("--out", args->out, "model output path")->required();
    c->add_option("--lr", args->lr, "base learning rate");
    c->add_option("--decay", args->decay, "lr decay per epoch");
    c->add_option("--batch", args->batch, "batch size (0 = module default)");
    c->add_flag("--no-midlayer", args->no_midlayer, "drop the mid-layer auxiliary");
    c->add_option("--points", args->points, "resampled points per cloud");
    c->add_option("--max-captures", args->max_captures, "cap dataset size (0 = all)");
    c->add_option("--log", args->log, "epoch log CSV path");
  }

  std::string infer_model, infer_frame;
  auto* cmd_inf = app.add_subcommand("infer", "run one model on one capture");
  cmd_inf->add_option("--model", infer_model, "model.bin")->required();
  cmd_inf->add_option("--frame", infer_frame, "capture directory")->required();

  TrackArgs track;
  auto* cmd_trk = app.add_subcommand("track", "track a recorded dataset");
  cmd_trk->add_option("--data", track.data, "dataset directory")->required();
  cmd_trk->add_option("--roi", track.roi_model, "RoI model.bin");
  cmd_trk->add_option("--seg", track.seg_model, "segmentation model.bin");
  cmd_trk->add_option("--ref", track.ref, "reference cloud")->required();
  cmd_trk->add_option("--hip", track.hip, "model hip center x,y,z (default: ref sidecar)");
  cmd_trk->add_option("--out", track.out, "pose log CSV")->required();
  cmd_trk->add_flag("--serial", track.serial, "single-thread both stages");
  cmd_trk->add_flag("--oracle-mask", track.oracle, "gt RoI + mask instead of the networks");
  cmd_trk->add_flag("--latest-wins", track.latest_wins, "drop stale segmentations");
  cmd_trk->add_flag("--init-gt", track.init_gt, "warm-start frame 0 from its gt pose");
  cmd_trk->add_option("--points", track.points, "resampled points per cloud");
  cmd_trk->add_option("--restarts", track.restarts, "axial re-registrations per frame");
  cmd_trk->add_option("--scan", track.scan, "axial pre-scan half-range, deg");
  cmd_trk->add_option("--max-iter", track.max_iter, "ICP iteration cap");
  cmd_trk->add_flag("--pinned", track.pinned, "hard hip equality (translation elimination)");
  cmd_trk->add_option("--timing", track.timing, "timing report JSON");

  EvalArgs eval;
  auto* cmd_ev = app.add_subcommand("eval", "Table-1 style evaluation on a labelled dataset");
  cmd_ev->add_option("--data", eval.data, "dataset directory")->required();
  cmd_ev->add_option("--roi", eval.roi_model, "RoI model.bin")->required();
  cmd_ev->add_option("--seg", eval.seg_model, "segmentation model.bin")->required();
  cmd_ev->add_option("--ref", eval.ref, "reference cloud")->required();
  cmd_ev->add_option("--hip", eval.hip, "model hip center x,y,z (default: ref sidecar)");
  cmd_ev->add_option("--out", eval.out, "report JSON path")->required();
  cmd_ev->add_option("--csv", eval.csv, "report CSV path");
  cmd_ev->add_option("--points", eval.points, "resampled points per cloud");
  cmd_ev->add_flag("--no-pose", eval.no_pose, "skip pose evaluation");

  std::string pw_frame1, pw_frame2, pw_band, pw_out;
  double pw_sat = 0.3, pw_val = 0.2;
  auto* cmd_pw = app.add_subcommand("label-pairwise", "pairwise HSV labelling of a capture pair");
  cmd_pw->add_option("--frame1", pw_frame1, "unoccluded capture directory")->required();
  cmd_pw->add_option("--frame2", pw_frame2, "occluded capture directory")->required();
  cmd_pw->add_option("--band", pw_band, "hue band, deg lo:hi (default 260:320)");
  cmd_pw->add_option("--sat-min", pw_sat, "saturation floor");
  cmd_pw->add_option("--val-min", pw_val, "value floor");
  cmd_pw->add_option("--out", pw_out, "output mask path");

  app.add_subcommand("bench", "quick per-stage timing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) return cmd_gen_data(gen);
    if (app.got_subcommand("train-roi")) return cmd_train(train_roi, true);
    if (app.got_subcommand("train-seg")) return cmd_train(train_seg, false);
    if (cmd_inf->parsed()) return cmd_infer(infer_model, infer_frame);
    if (cmd_trk->parsed()) return cmd_track(track);
    if (cmd_ev->parsed()) return cmd_eval(eval);
    if (cmd_pw->parsed())
      return cmd_label_pairwise(pw_frame1, pw_frame2, pw_band, pw_sat, pw_val, pw_out);
    if (app.got_subcommand("bench")) return cmd_bench();
  } catch (const Error& e) {
    std::cerr << "error[" << e.kind() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[unexpected]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
