#include "boneloc/synthcam/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "boneloc/error.hpp"
#include "boneloc/synthcam/image_io.hpp"
#include "boneloc/synthcam/noise.hpp"
#include "boneloc/synthcam/renderer.hpp"

namespace boneloc::synthcam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_str(std::uint64_t h, const std::string& s) {
  return fnv1a(h, s.data(), s.size());
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xd1b54a32d192ed03ULL);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json pose_json(const geom::RigidTransform& t) {
  const Eigen::Matrix4d m = t.matrix();
  json arr = json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) arr.push_back(m(r, c));
  return arr;
}

geom::RigidTransform pose_from_json(const json& arr) {
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = arr.at(r * 4 + c).get<double>();
  return geom::RigidTransform::from_matrix(m);
}

}  // namespace

void write_capture(const std::string& dir, const LabeledCapture& cap) {
  fs::create_directories(dir);
  write_ppm(dir + "/rgb.ppm", cap.rgb);
  write_depth_pgm(dir + "/depth.pgm", cap.depth);
  write_mask_pgm(dir + "/mask.pgm", cap.femur_mask, cap.depth.width, cap.depth.height);

  json meta;
  meta["intrinsics"] = {{"fx", cap.intrinsics.fx}, {"fy", cap.intrinsics.fy},
                        {"cx", cap.intrinsics.cx}, {"cy", cap.intrinsics.cy},
                        {"width", cap.intrinsics.width}, {"height", cap.intrinsics.height}};
  meta["roi_gt"] = {cap.roi_gt.x0, cap.roi_gt.y0, cap.roi_gt.x1, cap.roi_gt.y1};
  meta["pose_gt"] = pose_json(cap.pose_gt);
  meta["seed"] = cap.seed;
  meta["occluded"] = cap.occluded;
  meta["occluded_femur_px"] = cap.occluded_femur_px;
  meta["scene_index"] = cap.scene_index;
  meta["capture_index"] = cap.capture_index;

  std::ofstream os(dir + "/meta.json");
  if (!os) fail("io", "cannot write " + dir + "/meta.json");
  os << meta.dump(2) << "\n";
}

LabeledCapture read_capture(const std::string& dir) {
  LabeledCapture cap;
  cap.rgb = read_ppm(dir + "/rgb.ppm");
  cap.depth = read_depth_pgm(dir + "/depth.pgm");
  int mw = 0, mh = 0;
  cap.femur_mask = read_mask_pgm(dir + "/mask.pgm", &mw, &mh);
  if (mw != cap.depth.width || mh != cap.depth.height)
    fail("io", "mask/depth size mismatch in " + dir);

  std::ifstream is(dir + "/meta.json");
  if (!is) fail("io", "cannot read " + dir + "/meta.json");
  json meta = json::parse(is);
  const auto& k = meta.at("intrinsics");
  cap.intrinsics = {k.at("fx"), k.at("fy"), k.at("cx"), k.at("cy"), k.at("width"), k.at("height")};
  const auto& r = meta.at("roi_gt");
  cap.roi_gt = {r.at(0), r.at(1), r.at(2), r.at(3)};
  cap.pose_gt = pose_from_json(meta.at("pose_gt"));
  cap.seed = meta.at("seed");
  cap.occluded = meta.value("occluded", false);
  cap.occluded_femur_px = meta.value("occluded_femur_px", 0);
  cap.scene_index = meta.value("scene_index", 0);
  cap.capture_index = meta.value("capture_index", 0);
  return cap;
}

std::uint64_t config_hash(const SceneConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mesh_hash = [&](const geom::TriangleMesh& m) {
    for (const auto& v : m.vertices) h = fnv1a(h, v.data(), 3 * sizeof(double));
    for (const auto& t : m.triangles) h = fnv1a(h, t.data(), 3 * sizeof(std::uint32_t));
    for (const auto tag : m.tags) h = fnv1a(h, &tag, 1);
  };
  mesh_hash(cfg.femur);
  mesh_hash(cfg.soft_tissue);
  for (const auto& o : cfg.occluders) mesh_hash(o);

  json j;
  j["occ"] = {cfg.occluder_min, cfg.occluder_max, cfg.occluder_contact_prob,
              cfg.occluder_hover_mm.lo, cfg.occluder_hover_mm.hi, cfg.occluder_tangent_max_mm};
  j["light"] = {cfg.light_elevation_deg.lo, cfg.light_elevation_deg.hi, cfg.light_intensity.lo,
                cfg.light_intensity.hi, cfg.ambient.lo, cfg.ambient.hi,
                cfg.rgb_noise_sigma.lo, cfg.rgb_noise_sigma.hi};
  j["room"] = {cfg.room_half_size_mm.lo, cfg.room_half_size_mm.hi, cfg.distractor_max};
  j["cam"] = {cfg.camera_distance_mm.lo, cfg.camera_distance_mm.hi,
              cfg.camera_elevation_deg.lo, cfg.camera_elevation_deg.hi};
  j["intr"] = {cfg.intrinsics.fx, cfg.intrinsics.fy, cfg.intrinsics.cx, cfg.intrinsics.cy,
               cfg.intrinsics.width, cfg.intrinsics.height};
  j["noise"] = {cfg.noise.sigma_xy, cfg.noise.z_scale, cfg.noise.z_spread,
                cfg.noise.dropout_enabled, cfg.noise.projector_baseline.x(),
                cfg.noise.projector_baseline.y(), cfg.noise.projector_baseline.z()};
  j["gen"] = {cfg.captures_per_scene, cfg.min_femur_fraction, cfg.smooth_camera,
              cfg.reference_spacing_mm};
  return fnv1a_str(h, j.dump());
}

DatasetManifest generate_dataset(const SceneConfig& cfg, int scene_count, std::uint64_t seed,
                                 const std::string& out_dir) {
  fs::create_directories(out_dir);
  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.config_hash = config_hash(cfg);
  manifest.scene_count = scene_count;
  manifest.captures_per_scene = cfg.captures_per_scene;
  manifest.smooth_camera = cfg.smooth_camera;

  const auto total_px = double(cfg.intrinsics.width) * cfg.intrinsics.height;
  int capture_id = 0;
  for (int scene_idx = 0; scene_idx < scene_count; ++scene_idx) {
    Rng scene_rng(mix_seed(seed, 0x5ce4e, scene_idx));
    const SceneRealization scene = realize_scene(cfg, scene_rng);
    CameraTrack track;
    if (cfg.smooth_camera) track = sample_camera_track(cfg, scene, scene_rng);

    for (int cap_idx = 0; cap_idx < cfg.captures_per_scene; ++cap_idx) {
      const std::uint64_t cap_seed = mix_seed(seed, scene_idx, cap_idx + 1);
      Rng cap_rng(cap_seed);

      SceneInstance inst;
      RenderResult rendered;
      bool ok = false;
      for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        inst = place_capture(cfg, scene, cap_rng, cap_seed,
                             cfg.smooth_camera ? &track : nullptr, cap_idx);
        rendered = render(inst, cfg.intrinsics);
        ok = cfg.smooth_camera ||  // sequences keep hard frames; tracker handles them
             double(femur_pixel_count(rendered.tag_grid)) >= cfg.min_femur_fraction * total_px;
      }
      if (!ok) fail("femur never visible", "generate_dataset: scene " + std::to_string(scene_idx) +
                                               " capture " + std::to_string(cap_idx));

      const RenderContext ctx(inst, cfg.intrinsics);
      geom::DepthFrame depth = rendered.depth;
      if (cfg.noise.dropout_enabled) depth = simulate_dropout(ctx, depth);
      if (cfg.noise.sigma_xy > 0.0 || cfg.noise.z_scale > 0.0)
        depth = inject_noise(depth, cfg.noise, mix_seed(cap_seed, 0x401e, 0));

      LabeledCapture cap;
      cap.rgb = rendered.rgb;
      cap.depth = std::move(depth);
      try {
        auto labels = label_capture(rendered.tag_grid, cap.depth);
        cap.femur_mask = std::move(labels.femur_mask);
        cap.roi_gt = labels.roi_gt;
      } catch (const Error&) {
        if (!cfg.smooth_camera) throw;  // iid captures passed the visibility gate
        cap.femur_mask.assign(cap.depth.pixel_count(), 0);
        cap.roi_gt = {};
      }
      cap.pose_gt = inst.pose_gt();
      cap.intrinsics = cfg.intrinsics;
      cap.seed = cap_seed;
      cap.occluded_femur_px = int(occluded_femur_pixels(ctx, rendered));
      const auto visible = femur_pixel_count(rendered.tag_grid);
      cap.occluded = cap.occluded_femur_px > 0 &&
                     double(cap.occluded_femur_px) >= 0.02 * double(visible + cap.occluded_femur_px);
      cap.scene_index = scene_idx;
      cap.capture_index = cap_idx;

      char name[32];
      std::snprintf(name, sizeof(name), "cap_%06d", capture_id++);
      write_capture(out_dir + "/" + name, cap);
      manifest.captures.push_back({name, cap_seed, scene_idx, cap_idx, cap.occluded});
    }
  }

  json j;
  j["version"] = manifest.version;
  j["seed"] = manifest.seed;
  j["config_hash"] = manifest.config_hash;
  j["scene_count"] = manifest.scene_count;
  j["captures_per_scene"] = manifest.captures_per_scene;
  j["smooth_camera"] = manifest.smooth_camera;
  j["reference"] = manifest.reference;
  json caps = json::array();
  for (const auto& e : manifest.captures)
    caps.push_back({{"dir", e.dir}, {"seed", e.seed}, {"scene", e.scene_index},
                    {"capture", e.capture_index}, {"occluded", e.occluded}});
  j["captures"] = caps;
  std::ofstream os(out_dir + "/manifest.json");
  if (!os) fail("io", "cannot write " + out_dir + "/manifest.json");
  os << j.dump(2) << "\n";
  return manifest;
}

DatasetManifest load_manifest(const std::string& dataset_dir) {
  std::ifstream is(dataset_dir + "/manifest.json");
  if (!is) fail("io", "cannot read " + dataset_dir + "/manifest.json");
  json j = json::parse(is);
  DatasetManifest m;
  m.version = j.at("version");
  m.seed = j.at("seed");
  m.config_hash = j.at("config_hash");
  m.scene_count = j.at("scene_count");
  m.captures_per_scene = j.at("captures_per_scene");
  m.smooth_camera = j.value("smooth_camera", false);
  m.reference = j.value("reference", std::string("ref.bin"));
  for (const auto& e : j.at("captures"))
    m.captures.push_back({e.at("dir"), e.at("seed"), e.at("scene"), e.at("capture"),
                          e.at("occluded")});
  return m;
}

}  // namespace boneloc::synthcam
