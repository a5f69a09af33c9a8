#include "lapshape/local_frame.hpp"

#include <Eigen/Eigenvalues>

#include "lapshape/error.hpp"

namespace lapshape {

LocalFrame build_local_frame(const PointCloud& cloud, PointId center, double r) {
  LocalFrame frame;
  frame.center_index = center;
  frame.neighbor_indices.push_back(center);
  for (PointId j : radius_neighbors(cloud, center, r)) frame.neighbor_indices.push_back(j);
  if (frame.neighbor_indices.size() < 3) {
    throw Error(ErrorCode::InsufficientSampling,
                "fewer than 3 points within radius " + std::to_string(r),
                {static_cast<std::int64_t>(center)});
  }

  Vec3 centroid = Vec3::Zero();
  for (PointId j : frame.neighbor_indices) centroid += cloud[j];
  centroid /= static_cast<double>(frame.neighbor_indices.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (PointId j : frame.neighbor_indices) {
    const Vec3 d = cloud[j] - centroid;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(frame.neighbor_indices.size());

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> pca(cov);
  const Vec3 ev = pca.eigenvalues();  // ascending
  if (!(ev[1] > 1e-12 * ev[2])) {
    throw Error(ErrorCode::DegenerateNeighborhood, "collinear neighborhood",
                {static_cast<std::int64_t>(center)});
  }
  frame.origin = centroid;
  frame.tangent_u = pca.eigenvectors().col(2).normalized();
  frame.tangent_v = pca.eigenvectors().col(1).normalized();
  frame.normal = frame.tangent_u.cross(frame.tangent_v).normalized();
  frame.variances = Vec3(ev[2], ev[1], std::max(ev[0], 0.0));

  frame.projected.reserve(frame.neighbor_indices.size());
  for (PointId j : frame.neighbor_indices) {
    const Vec3 d = cloud[j] - frame.origin;
    frame.projected.emplace_back(d.dot(frame.tangent_u), d.dot(frame.tangent_v));
  }
  return frame;
}

}  // namespace lapshape
