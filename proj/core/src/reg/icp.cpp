#include "boneloc/reg/icp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "boneloc/error.hpp"
#include "boneloc/reg/kabsch.hpp"

namespace boneloc::reg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 6-vector (axis-angle rotation, translation) of a small incremental update
struct Twist {
  Eigen::Vector3d rot{0, 0, 0};
  Eigen::Vector3d trans{0, 0, 0};
  double norm() const { return std::sqrt(rot.squaredNorm() + trans.squaredNorm()); }
};

Twist twist_of(const geom::RigidTransform& delta) {
  Twist t;
  const Eigen::AngleAxisd aa(delta.rotation());
  t.rot = aa.axis() * aa.angle();
  t.trans = delta.translation();
  return t;
}

IcpResult register_cloud(const geom::PointCloud& source, const ReferenceModel& model,
                         const HipConstraint* hip, const geom::RigidTransform& init,
                         const IcpParams& params, BicpMode mode) {
  if (source.size() < size_t(params.min_points))
    fail("too few points", "icp: " + std::to_string(source.size()) + " segmented points < " +
                               std::to_string(params.min_points));
  if (model.surface.empty()) fail("empty cloud", "icp: empty reference model");

  const size_t n = source.size();
  const double hip_weight =
      hip ? (hip->weight < 0.0 ? double(n) : hip->weight) : 0.0;

  geom::RigidTransform pose = init;
  IcpResult result;
  result.pose = pose;

  std::vector<Eigen::Vector3d> model_pts;
  std::vector<Eigen::Vector3d> cam_pts;
  std::vector<double> weights;
  std::vector<double> residuals(n);
  std::vector<int> corr(n);
  Twist prev_twist;
  bool have_prev = false;

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    const geom::RigidTransform inv = geom::invert(pose);
    for (size_t i = 0; i < n; ++i) {
      const auto nn = model.index.nearest(inv.apply(source.points[i]));
      corr[i] = nn.index;
      residuals[i] = nn.distance_mm;
    }

    double gate = std::numeric_limits<double>::infinity();
    if (params.rejection_scale > 0.0) {
      std::vector<double> sorted = residuals;
      const size_t mid = sorted.size() / 2;
      std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
      gate = std::max(params.rejection_scale * sorted[mid], 1e-12);
    }

    model_pts.clear();
    cam_pts.clear();
    weights.clear();
    double sse = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (residuals[i] > gate) continue;
      model_pts.push_back(model.surface.points[size_t(corr[i])]);
      cam_pts.push_back(source.points[i]);
      weights.push_back(1.0);
      sse += residuals[i] * residuals[i];
    }
    result.stats.inliers = int(model_pts.size());
    result.stats.rms_mm = model_pts.empty() ? 0.0 : std::sqrt(sse / double(model_pts.size()));
    result.stats.iterations = iter + 1;
    if (model_pts.size() < 3) break;

    geom::RigidTransform next;
    try {
      if (hip && hip_weight > 0.0 && mode == BicpMode::Pinned) {
        next = kabsch_pinned(model_pts, cam_pts, hip->hip_model, hip->hip_camera, weights);
      } else {
        if (hip && hip_weight > 0.0) {
          model_pts.push_back(hip->hip_model);
          cam_pts.push_back(hip->hip_camera);
          weights.push_back(hip_weight);
        }
        next = kabsch(model_pts, cam_pts, weights);
      }
    } catch (const Error&) {
      break;  // degenerate inlier set: keep the last pose, not converged
    }

    const geom::RigidTransform delta = geom::compose(next, geom::invert(pose));
    const Twist tw = twist_of(delta);
    pose = next;
    bool boosted = false;

    if (params.extrapolation_max > 1.0 && have_prev) {
      const double prev_norm = prev_twist.norm();
      const double cur_norm = tw.norm();
      if (prev_norm > 1e-15 && cur_norm > 1e-15 && cur_norm < prev_norm) {
        const double cosine = (tw.rot.dot(prev_twist.rot) + tw.trans.dot(prev_twist.trans)) /
                              (cur_norm * prev_norm);
        if (cosine > 0.9) {
          const double ratio = cur_norm / prev_norm;
          double factor = std::min(params.extrapolation_max, ratio / (1.0 - ratio));
          // absolute step bounds keep the boost from thrashing the
          // correspondence/rejection sets
          const double angle = tw.rot.norm();
          if (angle > 1e-15) factor = std::min(factor, 3.5e-3 / angle);
          const double shift = tw.trans.norm();
          if (shift > 1e-15) factor = std::min(factor, 0.5 / shift);
          if (factor > 0.1) {
            geom::RigidTransform boost =
                angle > 1e-15
                    ? geom::RigidTransform::from_axis_angle(tw.rot / angle, angle * factor,
                                                            tw.trans * factor)
                    : geom::RigidTransform::from_translation(tw.trans * factor);
            pose = geom::compose(boost, pose);
            boosted = true;
          }
        }
      }
    }
    prev_twist = tw;
    have_prev = true;

    // a boost just moved the pose to an unevaluated point; never declare
    // convergence off the pre-boost step
    if (!boosted &&
        geom::rotation_angle_deg(delta) * kPi / 180.0 < params.convergence_rot_rad &&
        geom::translation_norm_mm(delta) < params.convergence_trans_mm) {
      result.stats.converged = true;
      break;
    }
  }

  result.pose = pose;
  result.stats.rms_all_mm = surface_rms(source, model, pose);
  if (hip) result.stats.hip_residual_mm = (pose.apply(hip->hip_model) - hip->hip_camera).norm();
  return result;
}

}  // namespace

IcpResult icp(const geom::PointCloud& source, const ReferenceModel& model,
              const geom::RigidTransform& init, const IcpParams& params) {
  return register_cloud(source, model, nullptr, init, params, BicpMode::Weighted);
}

IcpResult bicp(const geom::PointCloud& source, const ReferenceModel& model,
               const HipConstraint& hip, const geom::RigidTransform& init,
               const IcpParams& params, BicpMode mode) {
  return register_cloud(source, model, &hip, init, params, mode);
}

double surface_rms(const geom::PointCloud& source, const ReferenceModel& model,
                   const geom::RigidTransform& pose, double keep_fraction) {
  const size_t n = source.size();
  if (n == 0) return 0.0;
  const geom::RigidTransform inv = geom::invert(pose);
  std::vector<double> d2(n);
  for (size_t i = 0; i < n; ++i) {
    const double d = model.index.nearest(inv.apply(source.points[i])).distance_mm;
    d2[i] = d * d;
  }
  const size_t keep = std::max<size_t>(1, size_t(keep_fraction * double(n)));
  std::nth_element(d2.begin(), d2.begin() + keep - 1, d2.end());
  double sse = 0.0;
  for (size_t i = 0; i < keep; ++i) sse += d2[i];
  return std::sqrt(sse / double(keep));
}

}  // namespace boneloc::reg
