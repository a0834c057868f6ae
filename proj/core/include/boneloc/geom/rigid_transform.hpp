#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace boneloc::geom {

/// SE(3) pose or frame transform: x_out = rotation * x_in + translation.
/// Rotation stays orthonormal with det +1 (drift beyond 1e-9 is repaired
/// by polar decomposition on composition).
class RigidTransform {
public:
  RigidTransform() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation_mm);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Eigen::Vector3d& t_mm);
  /// Rotation of `angle_rad` about `axis` (normalized internally), zero translation.
  static RigidTransform from_axis_angle(const Eigen::Vector3d& axis, double angle_rad,
                                        const Eigen::Vector3d& t_mm = Eigen::Vector3d::Zero());
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix4d matrix() const;

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }
  Eigen::Vector3d rotate(const Eigen::Vector3d& v) const { return rotation_ * v; }

  bool is_orthonormal(double tol = 1e-9) const;

private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// result applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

/// Axis-angle magnitude of the rotation part, in [0, 180] degrees.
double rotation_angle_deg(const RigidTransform& t);
/// Euclidean norm of the translation part, mm.
double translation_norm_mm(const RigidTransform& t);

/// Nearest orthonormal matrix with det +1 (SVD polar decomposition).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m);

}  // namespace boneloc::geom
