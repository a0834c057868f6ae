#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "boneloc/geom/point_cloud.hpp"

namespace boneloc::geom {

struct NearestResult {
  int index = -1;
  double distance_mm = 0.0;
};

/// Exact nearest-neighbour k-d tree (median split). Read-only after build.
/// Ties resolve to the lowest point index, matching a linear scan.
class KdTree {
public:
  KdTree() = default;
  explicit KdTree(const PointCloud& cloud);

  size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  NearestResult nearest(const Eigen::Vector3d& query) const;

private:
  struct Node {
    int left = -1, right = -1;
    int first = 0, count = 0;  // leaf range in order_
    int axis = 0;
    double split = 0.0;
  };

  int build_node(int begin, int end);
  void search(int node, const Eigen::Vector3d& q, double& best_d2, int& best_idx) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

/// Build per the spec surface; throws on an empty cloud.
KdTree build_nn_index(const PointCloud& cloud);

/// Exhaustive scan oracle (lowest index on ties).
NearestResult nearest_brute(const PointCloud& cloud, const Eigen::Vector3d& query);

}  // namespace boneloc::geom
