#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "lapshape/eigensolver.hpp"

namespace lapshape {

struct Segmentation;

// Heat kernel signature k_t(x, x) sampled at ascending diffusion times.
struct HksField {
  std::vector<double> t_scales;
  Eigen::MatrixXd values;  // points x scales
  std::size_t eig_count = 0;

  std::size_t points() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t scales() const { return t_scales.size(); }
  Eigen::VectorXd column(std::size_t s) const { return values.col(static_cast<Eigen::Index>(s)); }
};

// m times log-spaced from 4 ln10 / lambda_{k-1} up to 4 ln10 / lambda_1.
// m = 1 gives the lower endpoint alone.
std::vector<double> default_t_scales(const EigenSystem& eigs, std::size_t m);

HksField compute_hks(const EigenSystem& eigs, const std::vector<double>& t_scales);

inline constexpr std::size_t kDefaultHeatKernelCap = 20000;

struct HeatKernelMatrix {
  double t = 0.0;
  Eigen::MatrixXd entries;
  bool has_negative = false;  // truncation produced negative entries
};

// Dense k_t(x, y). Refuses with MemoryGuard when n exceeds max_points
// (pass 0 to lift the cap).
HeatKernelMatrix compute_heat_kernel(const EigenSystem& eigs, double t,
                                     std::size_t max_points = kDefaultHeatKernelCap);

struct FeatureVector {
  Eigen::MatrixXd rows;  // feature points x scales, max entry 1
  std::vector<std::size_t> feature_point_ids;
};

// One row per segment: HKS over the first m scales at the segment's argmax
// of the reference-scale column (ties to the lowest id). Rows are ordered by
// descending reference value and the matrix is scaled to a max of 1.
FeatureVector build_feature_vector(const HksField& hks, const Segmentation& seg, std::size_t m);

}  // namespace lapshape
