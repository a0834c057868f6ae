#include "boneloc/reg/kabsch.hpp"

#include <Eigen/SVD>

#include "boneloc/error.hpp"

namespace boneloc::reg {

namespace {

Eigen::Matrix3d fit_rotation(const Eigen::Matrix3d& cross_cov) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(1) <= 1e-12 * std::max(sv(0), 1e-300))
    fail("degenerate configuration", "kabsch: correspondence rank < 2");
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return svd.matrixV() * d * svd.matrixU().transpose();
}

}  // namespace

geom::RigidTransform kabsch(std::span<const Eigen::Vector3d> src,
                            std::span<const Eigen::Vector3d> dst,
                            std::span<const double> weights) {
  const size_t n = src.size();
  if (n != dst.size() || (!weights.empty() && weights.size() != n))
    fail("shape mismatch", "kabsch: src/dst/weights length mismatch");
  if (n < 3) fail("degenerate configuration", "kabsch: needs >= 3 correspondences");

  double wsum = 0.0;
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    wsum += w;
    cs += w * src[i];
    cd += w * dst[i];
  }
  if (wsum <= 0.0) fail("degenerate configuration", "kabsch: non-positive total weight");
  cs /= wsum;
  cd /= wsum;

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    h += w * (src[i] - cs) * (dst[i] - cd).transpose();
  }
  h /= wsum;  // scale-free: doubling all weights changes nothing

  const Eigen::Matrix3d r = fit_rotation(h);
  return geom::RigidTransform(r, cd - r * cs);
}

geom::RigidTransform kabsch_pinned(std::span<const Eigen::Vector3d> src,
                                   std::span<const Eigen::Vector3d> dst,
                                   const Eigen::Vector3d& pivot_src,
                                   const Eigen::Vector3d& pivot_dst,
                                   std::span<const double> weights) {
  const size_t n = src.size();
  if (n != dst.size() || (!weights.empty() && weights.size() != n))
    fail("shape mismatch", "kabsch_pinned: src/dst/weights length mismatch");
  if (n < 2) fail("degenerate configuration", "kabsch_pinned: needs >= 2 correspondences");

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    h += w * (src[i] - pivot_src) * (dst[i] - pivot_dst).transpose();
  }
  const Eigen::Matrix3d r = fit_rotation(h);
  return geom::RigidTransform(r, pivot_dst - r * pivot_src);
}

}  // namespace boneloc::reg
