#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boneloc/geom/camera.hpp"
#include "boneloc/geom/rigid_transform.hpp"
#include "boneloc/geom/roi.hpp"
#include "boneloc/synthcam/scene.hpp"

namespace boneloc::synthcam {

/// One synthetic (or real) frame with its labels, as stored on disk:
/// rgb.ppm (P6), depth.pgm (P5 16-bit BE, mm*10), mask.pgm (P5, 255=femur),
/// meta.json (intrinsics, roi_gt, pose_gt, seed, occlusion metadata).
struct LabeledCapture {
  geom::RgbFrame rgb;
  geom::DepthFrame depth;                // post dropout+noise, 0.1 mm ticks once on disk
  std::vector<std::uint8_t> femur_mask;  // 1 = femur
  geom::RoiRect roi_gt;
  geom::RigidTransform pose_gt;          // camera <- femur model
  geom::CameraIntrinsics intrinsics;
  std::uint64_t seed = 0;
  bool occluded = false;
  int occluded_femur_px = 0;
  int scene_index = 0, capture_index = 0;
};

void write_capture(const std::string& dir, const LabeledCapture& capture);
LabeledCapture read_capture(const std::string& dir);

struct ManifestEntry {
  std::string dir;  // relative to the dataset root
  std::uint64_t seed = 0;
  int scene_index = 0, capture_index = 0;
  bool occluded = false;
};

struct DatasetManifest {
  int version = 1;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  int scene_count = 0;
  int captures_per_scene = 0;
  bool smooth_camera = false;
  std::string reference = "ref.bin";
  std::vector<ManifestEntry> captures;
};

/// scene_count x captures_per_scene captures under out_dir plus
/// manifest.json. Deterministic for a fixed (config, seed): regeneration is
/// byte-identical. Capture generation is keyed by derived per-capture seeds.
DatasetManifest generate_dataset(const SceneConfig& cfg, int scene_count, std::uint64_t seed,
                                 const std::string& out_dir);

DatasetManifest load_manifest(const std::string& dataset_dir);

/// Stable FNV-1a hash of the generator configuration (meshes included).
std::uint64_t config_hash(const SceneConfig& cfg);

}  // namespace boneloc::synthcam
