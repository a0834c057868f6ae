#include "boneloc/synthcam/scene.hpp"

#include <cmath>

#include "boneloc/error.hpp"
#include "boneloc/synthcam/anatomy.hpp"
#include "boneloc/synthcam/renderer.hpp"

namespace boneloc::synthcam {

using geom::PartTag;
using geom::RigidTransform;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

Eigen::Vector3d hsv_to_rgb(double h_deg, double s, double v) {
  double h = std::fmod(h_deg, 360.0);
  if (h < 0.0) h += 360.0;
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1)      { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else             { r = c; b = x; }
  const double m = v - c;
  return {r + m, g + m, b + m};
}

Eigen::Vector3d sample_albedo(const HsvInterval& range, Rng& rng) {
  return hsv_to_rgb(range.hue_deg.sample(rng), range.saturation.sample(rng),
                    range.value.sample(rng));
}

// deterministic per-triangle brightness jitter, the flat-shading stand-in
// for texture blending
double tri_jitter(std::uint64_t scene_salt, std::uint64_t tri) {
  std::uint64_t x = scene_salt ^ (tri * 0x9e3779b97f4a7c15ULL);
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  return 0.92 + 0.16 * (double(x >> 11) * 0x1.0p-53);
}

RigidTransform random_rotation(Rng& rng) {
  // uniform-ish: random axis + angle; orthonormality enforced by the type
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  while (axis.norm() < 1e-6) axis = {rng.normal(), rng.normal(), rng.normal()};
  return RigidTransform::from_axis_angle(axis, rng.uniform(0.0, 2.0 * kPi));
}

RigidTransform look_at_camera(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                              double roll) {
  const Eigen::Vector3d z = (target - eye).normalized();  // optical axis
  Eigen::Vector3d up(0.0, 0.0, 1.0);
  if (std::abs(z.dot(up)) > 0.98) up = Eigen::Vector3d(0.0, 1.0, 0.0);
  const Eigen::Vector3d x = z.cross(up).normalized();  // y ends up pointing "down"
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  const Eigen::Matrix3d roll_m =
      Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return RigidTransform(r * roll_m, eye);
}

Eigen::Vector3d spherical_dir(double azimuth, double elevation) {
  return {std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
          std::sin(elevation)};
}

void append_with_albedo(geom::TriangleMesh& world, std::vector<Eigen::Vector3d>& albedo,
                        const geom::TriangleMesh& part, const RigidTransform& pose,
                        const Eigen::Vector3d& base_color, std::uint64_t salt) {
  const size_t first = world.triangle_count();
  world.append(part, pose);
  for (size_t t = first; t < world.triangle_count(); ++t)
    albedo.push_back(base_color * tri_jitter(salt, t - first));
}

}  // namespace

SceneConfig default_scene_config() {
  SceneConfig cfg;
  cfg.femur = make_femur_mesh();
  cfg.soft_tissue = make_skin_mesh();
  cfg.soft_tissue.append(make_tibia_mesh(), RigidTransform::identity());
  cfg.occluders = make_occluder_meshes();
  // 320x180, ~56 deg horizontal FOV: keeps the exposed knee above the 1%
  // visibility gate over the whole 0.5-1 m working range
  cfg.intrinsics = {300.0, 300.0, 160.0, 90.0, 320, 180};
  cfg.camera_elevation_deg = {-5.0, 60.0};
  return cfg;
}

SceneRealization realize_scene(const SceneConfig& cfg, Rng& rng) {
  SceneRealization s;

  // femur (with soft tissue rigidly attached) on the "table", mild tilt
  const double yaw = rng.uniform(0.0, 2.0 * kPi);
  const double pitch = rng.uniform(-25.0, 25.0) * kDeg;
  const double roll = rng.uniform(-25.0, 25.0) * kDeg;
  const Eigen::Matrix3d r =
      (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
       Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()) *
       Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitY()))
          .toRotationMatrix();
  s.femur_pose = RigidTransform(r, Eigen::Vector3d::Zero());

  const std::uint64_t salt = rng.next();
  const Eigen::Vector3d femur_color = sample_albedo(cfg.femur_albedo, rng);
  const Eigen::Vector3d tissue_color = sample_albedo(cfg.tissue_albedo, rng);
  append_with_albedo(s.static_world, s.static_albedo, cfg.femur, s.femur_pose, femur_color, salt);
  append_with_albedo(s.static_world, s.static_albedo, cfg.soft_tissue, s.femur_pose, tissue_color,
                     salt ^ 0x51ed270b);

  const double room_half = cfg.room_half_size_mm.sample(rng);
  append_with_albedo(s.static_world, s.static_albedo, make_room_mesh(room_half),
                     RigidTransform::identity(), sample_albedo(cfg.background_albedo, rng),
                     salt ^ 0xa11b0c5);

  const int distractors = int(rng.uniform_index(std::uint64_t(cfg.distractor_max + 1)));
  for (int i = 0; i < distractors; ++i) {
    const Eigen::Vector3d half(rng.uniform(30.0, 300.0), rng.uniform(30.0, 300.0),
                               rng.uniform(30.0, 300.0));
    const double dist = rng.uniform(600.0, room_half * 0.9);
    const Eigen::Vector3d pos =
        spherical_dir(rng.uniform(0.0, 2.0 * kPi), rng.uniform(-0.3, 1.0)) * dist;
    RigidTransform pose = random_rotation(rng);
    pose = RigidTransform(pose.rotation(), pos);
    append_with_albedo(s.static_world, s.static_albedo, make_box_mesh(half, PartTag::Background),
                       pose, sample_albedo(cfg.background_albedo, rng), salt ^ (0x77 + i));
  }

  // occluder subset + materials for this scene
  const int n_occ = cfg.occluders.empty()
                        ? 0
                        : int(cfg.occluder_min +
                              rng.uniform_index(std::uint64_t(cfg.occluder_max - cfg.occluder_min + 1)));
  for (int i = 0; i < n_occ; ++i) {
    s.occluder_kinds.push_back(int(rng.uniform_index(cfg.occluders.size())));
    s.occluder_albedo.push_back(sample_albedo(cfg.occluder_albedo, rng));
  }

  const double light_az = rng.uniform(0.0, 2.0 * kPi);
  const double light_el = cfg.light_elevation_deg.sample(rng) * kDeg;
  s.light_dir = spherical_dir(light_az, light_el);
  s.light_tint = {rng.uniform(0.9, 1.0), rng.uniform(0.9, 1.0), rng.uniform(0.9, 1.0)};
  s.light_intensity = cfg.light_intensity.sample(rng);
  s.ambient = cfg.ambient.sample(rng);
  s.rgb_noise_sigma = cfg.rgb_noise_sigma.sample(rng);
  return s;
}

CameraTrack sample_camera_track(const SceneConfig& cfg, const SceneRealization& scene, Rng& rng) {
  CameraTrack t;
  t.azimuth0 = rng.uniform(0.0, 2.0 * kPi);
  // keep the per-frame azimuth step (the bone's weakly constrained
  // direction) moderate; most inter-frame motion comes from the polar and
  // distance oscillations
  t.azimuth_step = rng.uniform(0.25, 0.6) * kDeg * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  t.polar0 = cfg.track_polar_deg.sample(rng) * kDeg;
  t.polar_amp = rng.uniform(4.0, 10.0) * kDeg;
  const double d_lo = cfg.camera_distance_mm.lo, d_hi = cfg.camera_distance_mm.hi;
  t.distance0 = rng.uniform(d_lo + 0.2 * (d_hi - d_lo), d_hi - 0.2 * (d_hi - d_lo));
  t.distance_amp = rng.uniform(0.0, 0.12) * (d_hi - d_lo);
  t.roll0 = rng.uniform(-kPi, kPi);
  t.roll_step = rng.uniform(-0.4, 0.4) * kDeg;
  t.target = scene.femur_pose.apply(femur_exposure_center());
  return t;
}

SceneInstance place_capture(const SceneConfig& cfg, const SceneRealization& scene, Rng& rng,
                            std::uint64_t seed, const CameraTrack* track, int track_index) {
  SceneInstance inst;
  inst.seed = seed;
  inst.femur_pose = scene.femur_pose;
  inst.light_dir = scene.light_dir;
  inst.light_tint = scene.light_tint;
  inst.light_intensity = scene.light_intensity;
  inst.ambient = scene.ambient;
  inst.rgb_noise_sigma = scene.rgb_noise_sigma;

  const Eigen::Vector3d exposure = scene.femur_pose.apply(femur_exposure_center());

  if (track) {
    const double az = track->azimuth0 + track->azimuth_step * track_index;
    const double polar =
        track->polar0 + track->polar_amp * std::sin(2.0 * kPi * track_index / 26.0);
    const double dist = track->distance0 +
                        track->distance_amp * std::sin(2.0 * kPi * track_index / 57.0);
    // direction in the femur frame, polar measured from the distal -y axis
    const Eigen::Vector3d dir_bone(std::sin(polar) * std::cos(az), -std::cos(polar),
                                   std::sin(polar) * std::sin(az));
    const Eigen::Vector3d eye = track->target + scene.femur_pose.rotate(dir_bone) * dist;
    inst.camera_pose =
        look_at_camera(eye, track->target, track->roll0 + track->roll_step * track_index);
  } else {
    const double az = rng.uniform(0.0, 2.0 * kPi);
    const double el = cfg.camera_elevation_deg.sample(rng) * kDeg;
    const double dist = cfg.camera_distance_mm.sample(rng);
    const Eigen::Vector3d target =
        exposure + Eigen::Vector3d(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20));
    const Eigen::Vector3d eye = target + spherical_dir(az, el) * dist;
    inst.camera_pose = look_at_camera(eye, target, rng.uniform(-kPi, kPi));
  }
  inst.projector_pos = inst.camera_pose.apply(cfg.noise.projector_baseline);

  inst.world = scene.static_world;
  inst.tri_albedo = scene.static_albedo;
  inst.occluder_tri_begin = std::uint32_t(inst.world.triangle_count());

  // occluders: tip snapped to a camera-visible femur point (or hovering
  // between it and the camera), body oriented into the camera hemisphere
  const Eigen::Vector3d cam_pos = inst.camera_pose.translation();
  geom::Bvh static_bvh;  // built lazily only if occluders need visibility probes
  if (!scene.occluder_kinds.empty()) static_bvh = geom::Bvh(scene.static_world);
  for (size_t i = 0; i < scene.occluder_kinds.size(); ++i) {
    Eigen::Vector3d anchor = exposure;
    for (int attempt = 0; attempt < 20; ++attempt) {
      const Eigen::Vector3d probe =
          exposure + Eigen::Vector3d(rng.uniform(-35, 35), rng.uniform(-35, 35),
                                     rng.uniform(-35, 35));
      const Eigen::Vector3d dir = (probe - cam_pos).normalized();
      const auto hit = static_bvh.raycast(cam_pos, dir);
      if (hit && hit->tag == PartTag::Femur) {
        anchor = cam_pos + dir * hit->t;
        break;
      }
    }
    const Eigen::Vector3d to_cam = (cam_pos - anchor).normalized();
    // tangential slide on the surface plane
    Eigen::Vector3d t1 = to_cam.cross(Eigen::Vector3d::UnitZ());
    if (t1.norm() < 0.1) t1 = to_cam.cross(Eigen::Vector3d::UnitY());
    t1.normalize();
    const Eigen::Vector3d t2 = to_cam.cross(t1);
    const double slide = rng.uniform(0.0, cfg.occluder_tangent_max_mm);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    Eigen::Vector3d tip = anchor + slide * (std::cos(phi) * t1 + std::sin(phi) * t2);
    if (rng.uniform() >= cfg.occluder_contact_prob)
      tip += to_cam * cfg.occluder_hover_mm.sample(rng);

    // body direction: cone around to_cam
    const double cone = rng.uniform(0.0, 65.0) * kDeg;
    const double spin = rng.uniform(0.0, 2.0 * kPi);
    const Eigen::Vector3d body_dir =
        (std::cos(cone) * to_cam +
         std::sin(cone) * (std::cos(spin) * t1 + std::sin(spin) * t2))
            .normalized();
    const Eigen::Matrix3d orient =
        Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), body_dir)
            .toRotationMatrix() *
        Eigen::AngleAxisd(rng.uniform(0.0, 2.0 * kPi), Eigen::Vector3d::UnitZ())
            .toRotationMatrix();
    append_with_albedo(inst.world, inst.tri_albedo, cfg.occluders[scene.occluder_kinds[i]],
                       RigidTransform(orient, tip), scene.occluder_albedo[i],
                       seed ^ (0x0cc1 + i));
  }
  inst.occluder_tri_end = std::uint32_t(inst.world.triangle_count());
  inst.occluder_count = int(scene.occluder_kinds.size());
  return inst;
}

SceneInstance randomize_scene(const SceneConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const SceneRealization scene = realize_scene(cfg, rng);
  const auto total = std::size_t(cfg.intrinsics.width) * cfg.intrinsics.height;
  for (int attempt = 0; attempt < 100; ++attempt) {
    SceneInstance inst = place_capture(cfg, scene, rng, seed);
    const RenderResult probe = render(inst, cfg.intrinsics);
    if (double(femur_pixel_count(probe.tag_grid)) >= cfg.min_femur_fraction * double(total))
      return inst;
  }
  fail("femur never visible", "randomize_scene: no visible-femur capture in 100 attempts");
}

}  // namespace boneloc::synthcam
