#pragma once

#include <span>
#include <vector>

#include "boneloc/geom/point_cloud.hpp"
#include "boneloc/geom/rigid_transform.hpp"

namespace boneloc::reg {

/// Weighted least-squares rigid fit mapping src -> dst (cross-covariance SVD
/// with reflection correction). Requires >= 3 pairs spanning at least a
/// plane; uniform weight rescaling does not change the result.
geom::RigidTransform kabsch(std::span<const Eigen::Vector3d> src,
                            std::span<const Eigen::Vector3d> dst,
                            std::span<const double> weights = {});

/// Rotation-only variant about a pinned correspondence: finds R minimizing
/// sum w |R (src - pivot_src) - (dst - pivot_dst)|^2 and returns the rigid
/// transform with t chosen so pivot_src maps exactly onto pivot_dst.
geom::RigidTransform kabsch_pinned(std::span<const Eigen::Vector3d> src,
                                   std::span<const Eigen::Vector3d> dst,
                                   const Eigen::Vector3d& pivot_src,
                                   const Eigen::Vector3d& pivot_dst,
                                   std::span<const double> weights = {});

}  // namespace boneloc::reg
