#include "lapshape/normals.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "lapshape/error.hpp"
#include "lapshape/local_frame.hpp"

namespace lapshape {

std::vector<Vec3> estimate_normals(const PointCloud& cloud, double r) {
  std::vector<Vec3> normals(cloud.size(), Vec3::Zero());
  std::vector<std::int64_t> sparse, degenerate;
  for (PointId i = 0; i < cloud.size(); ++i) {
    try {
      normals[i] = build_local_frame(cloud, i, r).normal;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InsufficientSampling) sparse.push_back(static_cast<std::int64_t>(i));
      else degenerate.push_back(static_cast<std::int64_t>(i));
    }
  }
  if (!sparse.empty())
    throw Error(ErrorCode::InsufficientSampling, "points with fewer than 3 neighbors", sparse);
  if (!degenerate.empty())
    throw Error(ErrorCode::DegenerateNeighborhood, "points with collinear neighborhoods", degenerate);
  return normals;
}

double unsigned_angle(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), std::abs(a.dot(b)));
}

std::vector<double> max_normal_angle(const PointCloud& cloud, const std::vector<Vec3>& normals,
                                     double r) {
  if (normals.size() != cloud.size())
    throw Error(ErrorCode::InvalidInput, "normal count does not match cloud size");
  std::vector<double> out(cloud.size(), 0.0);
  std::vector<std::size_t> hits;
  for (PointId i = 0; i < cloud.size(); ++i) {
    cloud.index().radius_search(cloud[i], r, hits);
    double worst = 0.0;
    for (std::size_t j : hits)
      if (j != i) worst = std::max(worst, unsigned_angle(normals[i], normals[j]));
    out[i] = worst;
  }
  return out;
}

std::vector<PointId> detect_sharp_edges(const PointCloud& cloud, const std::vector<Vec3>& normals,
                                        double r, double angle_threshold) {
  const std::vector<double> angle = max_normal_angle(cloud, normals, r);
  std::vector<PointId> out;
  for (PointId i = 0; i < cloud.size(); ++i)
    if (angle[i] > angle_threshold) out.push_back(i);
  return out;
}

}  // namespace lapshape
