#include "boneloc/geom/bvh.hpp"

#include <algorithm>

namespace boneloc::geom {

namespace {

constexpr int kLeafSize = 4;

// Slab test against [t0, t1]; inclusive bounds so boxes touching the ray
// are never culled.
inline bool hit_box(const Aabb& b, const Eigen::Vector3d& o, const Eigen::Vector3d& inv_dir,
                    double t0, double t1) {
  for (int a = 0; a < 3; ++a) {
    double lo = (b.lo[a] - o[a]) * inv_dir[a];
    double hi = (b.hi[a] - o[a]) * inv_dir[a];
    if (inv_dir[a] < 0.0) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

Bvh::Bvh(const TriangleMesh& mesh) : mesh_(&mesh) {
  const int n = static_cast<int>(mesh.triangle_count());
  if (n == 0) return;

  std::vector<Aabb> tri_boxes(n);
  std::vector<Eigen::Vector3d> centers(n);
  std::vector<int> tris(n);
  for (int i = 0; i < n; ++i) {
    tris[i] = i;
    Aabb b;
    for (int c = 0; c < 3; ++c) b.grow(mesh.triangle_vertex(i, c));
    // tiny pad keeps borderline rays on the conservative side
    b.lo.array() -= 1e-9;
    b.hi.array() += 1e-9;
    tri_boxes[i] = b;
    centers[i] = 0.5 * (b.lo + b.hi);
  }
  nodes_.reserve(size_t(2) * n);
  build_node(tris, 0, n, tri_boxes, centers);
  order_ = std::move(tris);
}

int Bvh::build_node(std::vector<int>& tris, int begin, int end,
                    const std::vector<Aabb>& tri_boxes,
                    const std::vector<Eigen::Vector3d>& centers) {
  Node node;
  for (int i = begin; i < end; ++i) node.box.grow(tri_boxes[tris[i]]);
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(node);

  const int count = end - begin;
  if (count <= kLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = count;
    return index;
  }

  const Eigen::Vector3d extent = node.box.hi - node.box.lo;
  int axis = 0;
  if (extent.y() > extent.x()) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  const int mid = begin + count / 2;
  std::nth_element(tris.begin() + begin, tris.begin() + mid, tris.begin() + end,
                   [&](int a, int b) { return centers[a][axis] < centers[b][axis]; });

  const int left = build_node(tris, begin, mid, tri_boxes, centers);
  const int right = build_node(tris, mid, end, tri_boxes, centers);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

std::optional<RayHit> Bvh::raycast(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                   double t_min, double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  const Eigen::Vector3d inv_dir = dir.cwiseInverse();

  std::optional<RayHit> best;
  double limit = t_max;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!hit_box(node.box, origin, inv_dir, t_min, limit)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int tri = order_[i];
        const auto t = intersect_triangle(origin, dir, mesh_->triangle_vertex(tri, 0),
                                          mesh_->triangle_vertex(tri, 1),
                                          mesh_->triangle_vertex(tri, 2));
        if (t && *t > t_min && *t < limit) {
          best = RayHit{*t, std::uint32_t(tri), mesh_->tags[tri]};
          limit = *t;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

bool Bvh::occluded(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, double t_min,
                   double t_max) const {
  if (nodes_.empty()) return false;
  const Eigen::Vector3d inv_dir = dir.cwiseInverse();
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!hit_box(node.box, origin, inv_dir, t_min, t_max)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int tri = order_[i];
        const auto t = intersect_triangle(origin, dir, mesh_->triangle_vertex(tri, 0),
                                          mesh_->triangle_vertex(tri, 1),
                                          mesh_->triangle_vertex(tri, 2));
        if (t && *t > t_min && *t < t_max) return true;
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return false;
}

std::optional<RayHit> raycast_brute(const TriangleMesh& mesh, const Eigen::Vector3d& origin,
                                    const Eigen::Vector3d& dir, double t_min, double t_max) {
  std::optional<RayHit> best;
  double limit = t_max;
  for (size_t tri = 0; tri < mesh.triangle_count(); ++tri) {
    const auto t = intersect_triangle(origin, dir, mesh.triangle_vertex(tri, 0),
                                      mesh.triangle_vertex(tri, 1), mesh.triangle_vertex(tri, 2));
    if (t && *t > t_min && *t < limit) {
      best = RayHit{*t, std::uint32_t(tri), mesh.tags[tri]};
      limit = *t;
    }
  }
  return best;
}

}  // namespace boneloc::geom
