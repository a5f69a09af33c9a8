#pragma once

#include <vector>

#include "lapshape/point_cloud.hpp"

namespace lapshape {

// Unoriented unit normals from the PCA frame at every point. Collects every
// failing id before throwing InsufficientSampling / DegenerateNeighborhood.
std::vector<Vec3> estimate_normals(const PointCloud& cloud, double r);

// Sign-folded angle in [0, pi/2] between two unoriented directions.
double unsigned_angle(const Vec3& a, const Vec3& b);

// Per point, the largest unsigned normal angle to any point within r.
std::vector<double> max_normal_angle(const PointCloud& cloud, const std::vector<Vec3>& normals,
                                     double r);

// Points whose max_normal_angle exceeds angle_threshold (radians), ascending.
std::vector<PointId> detect_sharp_edges(const PointCloud& cloud, const std::vector<Vec3>& normals,
                                        double r, double angle_threshold);

}  // namespace lapshape
