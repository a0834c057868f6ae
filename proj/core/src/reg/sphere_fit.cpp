#include "boneloc/reg/sphere_fit.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "boneloc/error.hpp"

namespace boneloc::reg {

SphereFit fit_sphere(std::span<const Eigen::Vector3d> points) {
  const size_t n = points.size();
  if (n < 4) fail("degenerate configuration", "fit_sphere: needs >= 4 points");

  // Coope: |p|^2 = 2 p . c + (r^2 - |c|^2), linear in (c, k)
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  for (size_t i = 0; i < n; ++i) {
    a(i, 0) = 2.0 * points[i].x();
    a(i, 1) = 2.0 * points[i].y();
    a(i, 2) = 2.0 * points[i].z();
    a(i, 3) = 1.0;
    b(i) = points[i].squaredNorm();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(3) <= 1e-9 * std::max(sv(0), 1e-300))
    fail("degenerate configuration", "fit_sphere: coplanar points");
  const Eigen::Vector4d sol = svd.solve(b);

  SphereFit fit;
  fit.center = sol.head<3>();
  const double r2 = sol(3) + fit.center.squaredNorm();
  if (r2 <= 0.0) fail("degenerate configuration", "fit_sphere: negative squared radius");
  fit.radius_mm = std::sqrt(r2);

  // Gauss-Newton on radial residuals r_i = |p_i - c| - r
  for (int iter = 0; iter < 20; ++iter) {
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    double sse = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d d = points[i] - fit.center;
      const double dist = d.norm();
      if (dist < 1e-12) continue;
      const double res = dist - fit.radius_mm;
      Eigen::Vector4d jac;
      jac.head<3>() = -d / dist;
      jac(3) = -1.0;
      jtj += jac * jac.transpose();
      jtr += jac * res;
      sse += res * res;
    }
    const Eigen::Vector4d step = jtj.ldlt().solve(-jtr);
    fit.center += step.head<3>();
    fit.radius_mm += step(3);
    if (step.norm() < 1e-12 * std::max(1.0, fit.radius_mm)) break;
    (void)sse;
  }

  double sse = 0.0;
  for (const auto& p : points) {
    const double res = (p - fit.center).norm() - fit.radius_mm;
    sse += res * res;
  }
  fit.rms_mm = std::sqrt(sse / double(n));
  return fit;
}

std::vector<Eigen::Vector3d> pivot_landmarks(
    std::span<const std::pair<geom::RigidTransform, geom::RigidTransform>> tracked_and_icp,
    const geom::RigidTransform& hand_eye) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(tracked_and_icp.size());
  for (const auto& [tracker_pose, icp_pose] : tracked_and_icp) {
    const auto chain = geom::compose(tracker_pose, geom::compose(hand_eye, icp_pose));
    out.push_back(chain.apply(Eigen::Vector3d::Zero()));  // o = [0,0,0,1]^T
  }
  return out;
}

}  // namespace boneloc::reg
