#pragma once

#include <optional>

#include "boneloc/geom/point_cloud.hpp"
#include "boneloc/geom/rigid_transform.hpp"
#include "boneloc/reg/reference_model.hpp"

namespace boneloc::reg {

struct IcpParams {
  int max_iterations = 50;
  double convergence_rot_rad = 1e-4;    // incremental-update rotation angle
  double convergence_trans_mm = 1e-3;   // incremental-update translation norm
  double rejection_scale = 3.0;         // gate = scale * median residual; <= 0 disables
  int min_points = 100;                 // N_f_min
  // Besl-McKay style update extrapolation: when successive incremental
  // updates align, the geometric tail is applied at once. Counters the very
  // slow tangential convergence of point-to-point ICP on tube-like patches,
  // where the per-iteration contraction can sit above 0.99.
  double extrapolation_max = 60.0;      // <= 1 disables
};

struct IcpStats {
  int iterations = 0;
  bool converged = false;
  double rms_mm = 0.0;       // over accepted correspondences, final iteration
  double rms_all_mm = 0.0;   // over every source point at the final pose (ungated)
  int inliers = 0;
  double hip_residual_mm = 0.0;  // |P h - h_cam| when a hip constraint was used
};

struct IcpResult {
  geom::RigidTransform pose;  // camera <- model
  IcpStats stats;
};

/// Remote corresponding pair bounding the registration: model hip and the
/// measured hip center in the camera frame. Weight is the effective
/// correspondence multiplicity; <= 0 means "default to N_f".
struct HipConstraint {
  Eigen::Vector3d hip_model{0, 0, 0};   // h
  Eigen::Vector3d hip_camera{0, 0, 0};  // h^(D)(t)
  double weight = -1.0;
};

enum class BicpMode {
  Weighted,  // hip pair enters the least-squares fit at its weight
  Pinned,    // hard equality: rotation solved about the pinned hip pair
};

/// Point-to-point ICP of a camera-frame cloud onto the reference surface.
/// Returns the pose mapping model frame to camera frame. Non-convergence is
/// reported in stats, not an error; too few points is.
IcpResult icp(const geom::PointCloud& source, const ReferenceModel& model,
              const geom::RigidTransform& init, const IcpParams& params);

/// ICP with the persistent hip correspondence (Bounded ICP).
IcpResult bicp(const geom::PointCloud& source, const ReferenceModel& model,
               const HipConstraint& hip, const geom::RigidTransform& init,
               const IcpParams& params, BicpMode mode = BicpMode::Weighted);

/// Trimmed RMS of camera-frame points against the model surface under the
/// given pose (lowest `keep_fraction` of squared nearest distances).
double surface_rms(const geom::PointCloud& source, const ReferenceModel& model,
                   const geom::RigidTransform& pose, double keep_fraction = 0.8);

}  // namespace boneloc::reg
