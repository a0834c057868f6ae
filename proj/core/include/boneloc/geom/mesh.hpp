#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "boneloc/geom/rigid_transform.hpp"

namespace boneloc::geom {

enum class PartTag : std::uint8_t { Femur = 0, NotFemur = 1, Occluder = 2, Background = 3 };

/// Indexed triangle soup with a per-triangle part tag. Degenerate triangles
/// (area <= 1e-9 mm^2) are rejected at append time.
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;             // mm
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<PartTag> tags;                         // one per triangle

  size_t triangle_count() const { return triangles.size(); }

  void add_triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c, PartTag tag);
  /// Appends `other` transformed by `pose`, preserving tags.
  void append(const TriangleMesh& other, const RigidTransform& pose);
  /// Copy with only the triangles whose tag passes `keep`.
  TriangleMesh filtered(bool (*keep)(PartTag)) const;

  Eigen::Vector3d triangle_vertex(size_t tri, int corner) const {
    return vertices[triangles[tri][corner]];
  }
  double triangle_area(size_t tri) const;
  Eigen::Vector3d triangle_normal(size_t tri) const;  // unit, right-handed winding
};

struct RayHit {
  double t = 0.0;          // distance along the unit direction, mm
  std::uint32_t triangle = 0;
  PartTag tag = PartTag::Background;
};

/// Watertight-enough Moller-Trumbore test shared by the BVH and by the
/// brute-force oracles; returns the ray parameter or nothing.
std::optional<double> intersect_triangle(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                         const Eigen::Vector3d& v0, const Eigen::Vector3d& v1,
                                         const Eigen::Vector3d& v2);

}  // namespace boneloc::geom
