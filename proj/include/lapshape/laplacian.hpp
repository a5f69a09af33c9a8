#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "lapshape/point_cloud.hpp"

namespace lapshape {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Symmetric point-cloud Laplacian: stiffness W-hat (symmetric, zero row
// sums, non-positive off-diagonals) and the lumped mass diag(A_i / 3).
struct SpclOperator {
  SparseMatrix stiffness;
  Eigen::VectorXd mass;
  double radius = 0.0;
  double bandwidth = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(mass.size()); }
};

// Default ball radius and Gaussian bandwidth, in units of the sample spacing h.
// The radius is wide enough (about 6.7 eps) that truncating the kernel at r
// costs well under 1% of its second moment.
inline constexpr double kDefaultRadiusFactor = 10.0;
inline constexpr double kDefaultBandwidthFactor = 1.5;

// Bandwidth used when none is given: min(1.5 h, r / 2).
double default_bandwidth(double r, double h);

struct SpclAssembly {
  SpclOperator op;
  std::vector<Vec3> normals;  // PCA normals from the assembly frames
};

// Assembles the operator from per-point tangent frames of radius r with
// Gaussian bandwidth eps (eps <= 0 selects default_bandwidth).
// Fails with the complete list of offending point ids.
SpclAssembly assemble_spcl_with_normals(const PointCloud& cloud, double r, double eps = 0.0);
SpclOperator assemble_spcl(const PointCloud& cloud, double r, double eps = 0.0);

// Un-symmetrized row of the one-sided operator for point i: (neighbor id,
// weight) pairs for every neighbor with positive local area, plus the
// center's own area. Exposed for inspection and testing.
struct SpclRow {
  PointId center = 0;
  double center_area = 0.0;
  std::vector<std::pair<PointId, double>> weights;
};
SpclRow assemble_spcl_row(const PointCloud& cloud, PointId i, double r, double eps);

// Normalizing constant 4 / (pi (2 eps)^4).
double spcl_scale(double eps);

// Off-diagonal nonzeros of row i sorted by |weight| descending, then index.
std::vector<std::pair<PointId, double>> row_neighbors(const SpclOperator& op, PointId i);

struct RingEstimate {
  // rings[0] subset of rings[1] subset of rings[2] == all nonzeros of the row.
  std::array<std::vector<PointId>, 3> rings;
  bool degenerate = false;  // fewer than 3 distinct weight magnitudes
};

// Three-way 1D k-means on |off-diagonal weights| of row i.
RingEstimate ring_estimate(const SpclOperator& op, PointId i);

// Max over rows of |sum of row| relative to max |diagonal|.
double max_relative_row_sum(const SpclOperator& op);

}  // namespace lapshape
