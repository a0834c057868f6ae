#include "boneloc/geom/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boneloc/error.hpp"

namespace boneloc::geom {

namespace {
constexpr int kLeafSize = 8;
}

KdTree::KdTree(const PointCloud& cloud) : points_(cloud.points) {
  if (points_.empty()) fail("empty cloud", "KdTree: cannot index an empty cloud");
  order_.resize(points_.size());
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  build_node(0, static_cast<int>(points_.size()));
}

int KdTree::build_node(int begin, int end) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  const int count = end - begin;
  if (count <= kLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = count;
    return index;
  }

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  const Eigen::Vector3d extent = hi - lo;
  int axis = 0;
  if (extent.y() > extent.x()) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  const int mid = begin + count / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });

  nodes_[index].axis = axis;
  nodes_[index].split = points_[order_[mid]][axis];
  const int left = build_node(begin, mid);
  const int right = build_node(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

NearestResult KdTree::nearest(const Eigen::Vector3d& query) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_idx = -1;
  search(0, query, best_d2, best_idx);
  return {best_idx, std::sqrt(best_d2)};
}

void KdTree::search(int node_idx, const Eigen::Vector3d& q, double& best_d2, int& best_idx) const {
  const Node& node = nodes_[node_idx];
  if (node.count > 0) {
    for (int i = node.first; i < node.first + node.count; ++i) {
      const int idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && idx < best_idx)) {
        best_d2 = d2;
        best_idx = idx;
      }
    }
    return;
  }
  const double delta = q[node.axis] - node.split;
  const int near = delta < 0.0 ? node.left : node.right;
  const int far = delta < 0.0 ? node.right : node.left;
  search(near, q, best_d2, best_idx);
  if (delta * delta <= best_d2) search(far, q, best_d2, best_idx);
}

KdTree build_nn_index(const PointCloud& cloud) { return KdTree(cloud); }

NearestResult nearest_brute(const PointCloud& cloud, const Eigen::Vector3d& query) {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const double d2 = (cloud.points[i] - query).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(i);
    }
  }
  return {best, std::sqrt(best_d2)};
}

}  // namespace boneloc::geom
