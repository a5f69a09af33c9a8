#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace lapshape {

using Vec3 = Eigen::Vector3d;

// Static 3D kd-tree over a borrowed point array. The array must outlive the
// tree and must not be modified after construction.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points, std::size_t leaf_size = 8);

  // Indices of all points with squared distance <= r*r to `query`, unordered.
  void radius_search(const Vec3& query, double r, std::vector<std::size_t>& out) const;

  // The k nearest points to `query` as (squared distance, index), ascending
  // by distance then index. `exclude` is skipped when it is a valid index.
  std::vector<std::pair<double, std::size_t>> knn(const Vec3& query, std::size_t k,
                                                  std::size_t exclude = static_cast<std::size_t>(-1)) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    // Leaf when left == right == -1; otherwise split on `axis` at `split`.
    int axis = -1;
    double split = 0.0;
    int left = -1;
    int right = -1;
    std::size_t begin = 0;
    std::size_t end = 0;
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;
  };

  int build(std::size_t begin, std::size_t end);
  static double box_distance2(const Node& node, const Vec3& q);

  std::span<const Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_ = 8;
};

}  // namespace lapshape
