#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "boneloc/geom/camera.hpp"
#include "boneloc/geom/mesh.hpp"
#include "boneloc/geom/rigid_transform.hpp"
#include "boneloc/rng.hpp"

namespace boneloc::synthcam {

/// Structured-light sampling noise (per the D415-style model): pixel offsets
/// (dx, dy) ~ N(0, sigma_xy), depth deviation dz ~ z_scale * N(0, z_spread),
/// both parameters interpreted as standard deviations, plus projector-shadow
/// dropout controlled by the projector baseline.
struct NoiseParams {
  double sigma_xy = 0.5;    // px
  double z_scale = 0.08;    // mm
  double z_spread = 1.0 / 3.0;
  bool dropout_enabled = true;
  Eigen::Vector3d projector_baseline{55.0, 0.0, 0.0};  // mm, camera frame
};

struct Interval {
  double lo = 0.0, hi = 0.0;
  double sample(Rng& rng) const { return rng.uniform(lo, hi); }
};

struct HsvInterval {
  Interval hue_deg, saturation, value;
};

/// Everything the generator randomizes over, plus the fixed geometry.
struct SceneConfig {
  geom::TriangleMesh femur;
  geom::TriangleMesh soft_tissue;  // skin funnel, tibia, ... (NotFemur)
  std::vector<geom::TriangleMesh> occluders;

  int occluder_min = 0, occluder_max = 3;
  double occluder_contact_prob = 0.5;
  Interval occluder_hover_mm{5.0, 60.0};
  double occluder_tangent_max_mm = 30.0;

  Interval light_elevation_deg{15.0, 80.0};
  Interval light_intensity{0.55, 1.1};
  Interval ambient{0.15, 0.4};
  Interval rgb_noise_sigma{0.0, 0.02};

  Interval room_half_size_mm{1500.0, 3000.0};
  int distractor_max = 4;

  Interval camera_distance_mm{500.0, 1000.0};
  Interval camera_elevation_deg{-5.0, 70.0};
  // smooth-track viewpoint band, polar angle from the distal bone axis;
  // lower values keep the (asymmetric) condyles in view
  Interval track_polar_deg{45.0, 75.0};

  // bone reads bright and desaturated; tissue stays saturated and the room
  // stays darker than bone, as in a draped theatre
  HsvInterval femur_albedo{{25.0, 55.0}, {0.05, 0.30}, {0.75, 1.0}};
  HsvInterval tissue_albedo{{5.0, 30.0}, {0.40, 0.80}, {0.30, 0.80}};
  HsvInterval occluder_albedo{{0.0, 360.0}, {0.0, 1.0}, {0.10, 0.95}};
  HsvInterval background_albedo{{0.0, 360.0}, {0.0, 0.8}, {0.08, 0.65}};

  geom::CameraIntrinsics intrinsics;
  NoiseParams noise;
  int captures_per_scene = 20;
  double min_femur_fraction = 0.01;  // reject captures below this femur-pixel share
  bool smooth_camera = false;        // per-scene orbit trajectory instead of iid poses

  double reference_spacing_mm = 0.55;  // sampling pitch of the emitted reference cloud
};

/// Desk-scale default: canonical knee meshes, 180x320 frames (half RealSense
/// resolution with halved focals).
SceneConfig default_scene_config();

/// Per-scene realization shared by that scene's captures: poses of the
/// static geometry, lighting, materials and the occluder subset.
struct SceneRealization {
  geom::TriangleMesh static_world;             // femur+tissue+room+distractors, world frame
  std::vector<Eigen::Vector3d> static_albedo;  // per triangle
  geom::RigidTransform femur_pose;             // world <- femur model
  std::vector<int> occluder_kinds;
  std::vector<Eigen::Vector3d> occluder_albedo;
  Eigen::Vector3d light_dir;  // unit, toward the light
  Eigen::Vector3d light_tint;
  double light_intensity = 1.0, ambient = 0.2, rgb_noise_sigma = 0.0;
};

/// One capture: composed world mesh, camera/projector and bookkeeping.
struct SceneInstance {
  geom::TriangleMesh world;
  std::vector<Eigen::Vector3d> tri_albedo;
  geom::RigidTransform femur_pose;   // world <- femur model
  geom::RigidTransform camera_pose;  // world <- camera
  Eigen::Vector3d projector_pos;     // world
  Eigen::Vector3d light_dir, light_tint;
  double light_intensity = 1.0, ambient = 0.2, rgb_noise_sigma = 0.0;
  std::uint64_t seed = 0;
  int occluder_count = 0;
  std::uint32_t occluder_tri_begin = 0, occluder_tri_end = 0;

  /// Ground-truth femur pose in the camera frame.
  geom::RigidTransform pose_gt() const {
    return geom::compose(geom::invert(camera_pose), femur_pose);
  }
};

SceneRealization realize_scene(const SceneConfig& cfg, Rng& rng);

/// Smooth orbit parameters drawn once per scene when smooth_camera is set.
/// Angles are in the femur frame: azimuth spins about the bone axis, polar
/// is measured from the distal (-y) end, staying in the band where the
/// exposed surface is visible past the soft-tissue funnel.
struct CameraTrack {
  double azimuth0 = 0.0, azimuth_step = 0.0;
  double polar0 = 1.2, polar_amp = 0.0;
  double distance0 = 700.0, distance_amp = 0.0;
  double roll0 = 0.0, roll_step = 0.0;
  Eigen::Vector3d target{0, 0, 0};
};
CameraTrack sample_camera_track(const SceneConfig& cfg, const SceneRealization& scene, Rng& rng);

/// One capture attempt: samples camera (or evaluates the track at
/// `track_index`) and occluder poses. Does NOT run the visibility check.
SceneInstance place_capture(const SceneConfig& cfg, const SceneRealization& scene, Rng& rng,
                            std::uint64_t seed, const CameraTrack* track = nullptr,
                            int track_index = 0);

/// Spec-surface operation: full realization + capture placement with the
/// >= min_femur_fraction visibility loop (<= 100 attempts).
SceneInstance randomize_scene(const SceneConfig& cfg, std::uint64_t seed);

}  // namespace boneloc::synthcam
