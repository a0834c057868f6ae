#include "boneloc/geom/mesh.hpp"

#include "boneloc/error.hpp"

namespace boneloc::geom {

void TriangleMesh::add_triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c, PartTag tag) {
  const auto n = vertices.size();
  if (a >= n || b >= n || c >= n) fail("bad index", "add_triangle: vertex index out of range");
  const Eigen::Vector3d& va = vertices[a];
  const double area = 0.5 * (vertices[b] - va).cross(vertices[c] - va).norm();
  if (area <= 1e-9) return;  // drop slivers instead of propagating them
  triangles.push_back({a, b, c});
  tags.push_back(tag);
}

void TriangleMesh::append(const TriangleMesh& other, const RigidTransform& pose) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  vertices.reserve(vertices.size() + other.vertices.size());
  for (const auto& v : other.vertices) vertices.push_back(pose.apply(v));
  triangles.reserve(triangles.size() + other.triangles.size());
  for (size_t i = 0; i < other.triangles.size(); ++i) {
    const auto& t = other.triangles[i];
    triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    tags.push_back(other.tags[i]);
  }
}

TriangleMesh TriangleMesh::filtered(bool (*keep)(PartTag)) const {
  TriangleMesh out;
  out.vertices = vertices;  // keep indexing; unused vertices are harmless
  for (size_t i = 0; i < triangles.size(); ++i) {
    if (keep(tags[i])) {
      out.triangles.push_back(triangles[i]);
      out.tags.push_back(tags[i]);
    }
  }
  return out;
}

double TriangleMesh::triangle_area(size_t tri) const {
  const auto& t = triangles[tri];
  const Eigen::Vector3d& a = vertices[t[0]];
  return 0.5 * (vertices[t[1]] - a).cross(vertices[t[2]] - a).norm();
}

Eigen::Vector3d TriangleMesh::triangle_normal(size_t tri) const {
  const auto& t = triangles[tri];
  const Eigen::Vector3d& a = vertices[t[0]];
  return (vertices[t[1]] - a).cross(vertices[t[2]] - a).normalized();
}

std::optional<double> intersect_triangle(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                         const Eigen::Vector3d& v0, const Eigen::Vector3d& v1,
                                         const Eigen::Vector3d& v2) {
  const Eigen::Vector3d e1 = v1 - v0;
  const Eigen::Vector3d e2 = v2 - v0;
  const Eigen::Vector3d pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-12) return std::nullopt;  // parallel
  const double inv_det = 1.0 / det;
  const Eigen::Vector3d tvec = origin - v0;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Eigen::Vector3d qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return e2.dot(qvec) * inv_det;
}

}  // namespace boneloc::geom
