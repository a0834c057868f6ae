#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "boneloc/geom/rigid_transform.hpp"

namespace boneloc::reg {

struct SphereFit {
  Eigen::Vector3d center{0, 0, 0};
  double radius_mm = 0.0;
  double rms_mm = 0.0;  // radial residual
};

/// Algebraic linear least squares (Coope) followed by Gauss-Newton
/// refinement (<= 20 iterations). Needs >= 4 non-coplanar points.
SphereFit fit_sphere(std::span<const Eigen::Vector3d> points);

/// Eq.-style pivot landmark chain: o^(A)(t) = T_A<-Md(t) * T_Md<-D * P_icp(t) * origin.
std::vector<Eigen::Vector3d> pivot_landmarks(
    std::span<const std::pair<geom::RigidTransform, geom::RigidTransform>> tracked_and_icp,
    const geom::RigidTransform& hand_eye);

}  // namespace boneloc::reg
