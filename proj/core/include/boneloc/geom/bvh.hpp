#pragma once

#include <Eigen/Core>
#include <limits>
#include <optional>
#include <vector>

#include "boneloc/geom/mesh.hpp"

namespace boneloc::geom {

struct Aabb {
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity());

  void grow(const Eigen::Vector3d& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
};

/// Median-split BVH over axis-aligned boxes, leaf size 4. Read-only after
/// build; safe to share across threads.
class Bvh {
public:
  Bvh() = default;
  explicit Bvh(const TriangleMesh& mesh);

  bool empty() const { return nodes_.empty(); }
  const TriangleMesh& mesh() const { return *mesh_; }

  /// Nearest intersection with t in (t_min, t_max); `dir` must be unit length.
  std::optional<RayHit> raycast(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                double t_min = 1e-6,
                                double t_max = std::numeric_limits<double>::infinity()) const;

  /// True if any triangle intersects with t strictly inside (t_min, t_max).
  bool occluded(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, double t_min,
                double t_max) const;

private:
  struct Node {
    Aabb box;
    int left = -1, right = -1;   // internal node children
    int first = 0, count = 0;    // leaf triangle range in order_
  };

  int build_node(std::vector<int>& tris, int begin, int end,
                 const std::vector<Aabb>& tri_boxes, const std::vector<Eigen::Vector3d>& centers);

  const TriangleMesh* mesh_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<int> order_;  // triangle indices, leaf-contiguous
};

/// Exhaustive nearest-hit scan over every triangle; the test oracle for Bvh.
std::optional<RayHit> raycast_brute(const TriangleMesh& mesh, const Eigen::Vector3d& origin,
                                    const Eigen::Vector3d& dir, double t_min = 1e-6,
                                    double t_max = std::numeric_limits<double>::infinity());

}  // namespace boneloc::geom
