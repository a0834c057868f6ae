#include "boneloc/geom/rigid_transform.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "boneloc/error.hpp"

namespace boneloc::geom {

namespace {

double ortho_drift(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation_mm)
    : rotation_(rotation), translation_(translation_mm) {
  if (ortho_drift(rotation_) > 1e-9 || rotation_.determinant() < 0.0) {
    rotation_ = orthonormalize(rotation_);
  }
}

RigidTransform RigidTransform::from_translation(const Eigen::Vector3d& t_mm) {
  return RigidTransform(Eigen::Matrix3d::Identity(), t_mm);
}

RigidTransform RigidTransform::from_axis_angle(const Eigen::Vector3d& axis, double angle_rad,
                                               const Eigen::Vector3d& t_mm) {
  const double n = axis.norm();
  if (n <= 0.0) fail("degenerate axis", "from_axis_angle: zero axis");
  return RigidTransform(Eigen::AngleAxisd(angle_rad, axis / n).toRotationMatrix(), t_mm);
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  return RigidTransform(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

bool RigidTransform::is_orthonormal(double tol) const {
  return ortho_drift(rotation_) <= tol && rotation_.determinant() > 0.0;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  Eigen::Matrix3d r = a.rotation() * b.rotation();
  if (ortho_drift(r) > 1e-9) r = orthonormalize(r);
  return RigidTransform(r, a.rotation() * b.translation() + a.translation());
}

RigidTransform invert(const RigidTransform& t) {
  const Eigen::Matrix3d rt = t.rotation().transpose();
  return RigidTransform(rt, -(rt * t.translation()));
}

double rotation_angle_deg(const RigidTransform& t) {
  const Eigen::Matrix3d& r = t.rotation();
  // atan2 of the vee of the antisymmetric part keeps precision near 0 and pi.
  const Eigen::Vector3d v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * v.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  return std::atan2(s, c) * 180.0 / M_PI;
}

double translation_norm_mm(const RigidTransform& t) { return t.translation().norm(); }

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

}  // namespace boneloc::geom
