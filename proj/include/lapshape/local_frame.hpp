#pragma once

#include <vector>

#include <Eigen/Core>

#include "lapshape/point_cloud.hpp"

namespace lapshape {

using Vec2 = Eigen::Vector2d;

// PCA tangent frame of a radius neighborhood. Index 0 of `neighbor_indices`
// and `projected` is always the center point; the rest follow in
// radius_neighbors order.
struct LocalFrame {
  PointId center_index = 0;
  std::vector<PointId> neighbor_indices;
  Vec3 origin = Vec3::Zero();
  Vec3 tangent_u = Vec3::UnitX();
  Vec3 tangent_v = Vec3::UnitY();
  Vec3 normal = Vec3::UnitZ();
  // Covariance eigenvalues, descending.
  Vec3 variances = Vec3::Zero();
  std::vector<Vec2> projected;

  std::size_t size() const { return neighbor_indices.size(); }
};

// Throws InsufficientSampling when fewer than 3 points (center included) lie
// within r, and DegenerateNeighborhood when they are collinear.
LocalFrame build_local_frame(const PointCloud& cloud, PointId center, double r);

}  // namespace lapshape
