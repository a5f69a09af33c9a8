#include "lapshape/signatures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "lapshape/error.hpp"
#include "lapshape/segmentation.hpp"

namespace lapshape {

std::vector<double> default_t_scales(const EigenSystem& eigs, std::size_t m) {
  const std::size_t k = eigs.count();
  if (k < 2) throw Error(ErrorCode::InvalidInput, "t-scale schedule needs at least 2 eigenpairs");
  if (m == 0) throw Error(ErrorCode::InvalidInput, "t-scale count must be positive");
  const double lambda1 = eigs.eigenvalues[1];
  const double lambda_top = eigs.eigenvalues[static_cast<Eigen::Index>(k - 1)];
  if (!(lambda1 > 0.0))
    throw Error(ErrorCode::DisconnectedModel,
                "second eigenvalue is zero; the cloud has more than one connected component");

  const double c = 4.0 * std::numbers::ln10;
  const double lo = c / lambda_top;
  const double hi = c / lambda1;
  std::vector<double> t(m);
  if (m == 1) {
    t[0] = lo;
    return t;
  }
  if (!(hi > lo))
    throw Error(ErrorCode::InvalidInput, "eigenvalues 1 and k-1 coincide; scales cannot be spread");
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / static_cast<double>(m - 1);
  t.front() = lo;
  for (std::size_t i = 1; i + 1 < m; ++i) t[i] = std::exp(log_lo + step * static_cast<double>(i));
  t.back() = hi;
  return t;
}

HksField compute_hks(const EigenSystem& eigs, const std::vector<double>& t_scales) {
  for (double t : t_scales)
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidInput, "t-scales must be positive");
  const auto k = static_cast<Eigen::Index>(eigs.count());
  const auto m = static_cast<Eigen::Index>(t_scales.size());
  Eigen::MatrixXd decay(k, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < k; ++i)
      decay(i, j) = std::exp(-eigs.eigenvalues[i] * t_scales[static_cast<std::size_t>(j)]);

  HksField out;
  out.t_scales = t_scales;
  out.eig_count = eigs.count();
  out.values = eigs.eigenvectors.array().square().matrix() * decay;
  return out;
}

HeatKernelMatrix compute_heat_kernel(const EigenSystem& eigs, double t, std::size_t max_points) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidInput, "diffusion time must be positive");
  const std::size_t n = eigs.points();
  if (max_points != 0 && n > max_points)
    throw Error(ErrorCode::MemoryGuard,
                "dense heat kernel for " + std::to_string(n) + " points exceeds the cap of " +
                    std::to_string(max_points) + "; raise it with --max-kernel-points");

  const Eigen::ArrayXd decay = (-eigs.eigenvalues.array() * t).exp();
  const Eigen::MatrixXd scaled = eigs.eigenvectors * decay.matrix().asDiagonal();
  HeatKernelMatrix out;
  out.t = t;
  out.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.entries.triangularView<Eigen::Lower>() = scaled * eigs.eigenvectors.transpose();
  // Mirror so the matrix is exactly symmetric.
  out.entries.triangularView<Eigen::StrictlyUpper>() = out.entries.transpose();
  // The diagonal uses the same summation order as compute_hks.
  out.entries.diagonal() = eigs.eigenvectors.array().square().matrix() * decay.matrix();
  out.has_negative = (out.entries.array() < 0.0).any();
  return out;
}

FeatureVector build_feature_vector(const HksField& hks, const Segmentation& seg, std::size_t m) {
  const std::size_t segments = seg.segment_count();
  if (segments != m)
    throw Error(ErrorCode::InvalidInput, "feature vector needs " + std::to_string(m) +
                                             " segments, segmentation has " + std::to_string(segments));
  if (hks.scales() < m)
    throw Error(ErrorCode::InvalidInput, "feature vector needs " + std::to_string(m) +
                                             " t-scales, field has " + std::to_string(hks.scales()));
  if (seg.labels.size() != hks.points())
    throw Error(ErrorCode::InvalidInput, "segmentation and HKS field cover different point counts");

  const auto ref_it = std::find(hks.t_scales.begin(), hks.t_scales.end(), seg.reference_scale);
  if (ref_it == hks.t_scales.end())
    throw Error(ErrorCode::InvalidInput, "segmentation reference scale is not one of the HKS scales");
  const auto ref = static_cast<Eigen::Index>(ref_it - hks.t_scales.begin());

  std::vector<std::size_t> best(segments, hks.points());
  for (std::size_t p = 0; p < hks.points(); ++p) {
    const int label = seg.labels[p];
    if (label < 0) continue;
    std::size_t& b = best[static_cast<std::size_t>(label)];
    if (b == hks.points() || hks.values(static_cast<Eigen::Index>(p), ref) >
                                 hks.values(static_cast<Eigen::Index>(b), ref))
      b = p;
  }
  for (std::size_t s = 0; s < segments; ++s)
    if (best[s] == hks.points()) throw Error(ErrorCode::InvalidInput, "segmentation has an empty segment");

  std::vector<std::size_t> order(segments);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = hks.values(static_cast<Eigen::Index>(best[a]), ref);
    const double vb = hks.values(static_cast<Eigen::Index>(best[b]), ref);
    if (va != vb) return va > vb;
    return best[a] < best[b];
  });

  FeatureVector fv;
  const auto mm = static_cast<Eigen::Index>(m);
  fv.rows.resize(mm, mm);
  for (Eigen::Index r = 0; r < mm; ++r) {
    const std::size_t p = best[order[static_cast<std::size_t>(r)]];
    fv.feature_point_ids.push_back(p);
    fv.rows.row(r) = hks.values.row(static_cast<Eigen::Index>(p)).head(mm);
  }
  const double top = fv.rows.maxCoeff();
  if (!(top > 0.0)) throw Error(ErrorCode::InvalidInput, "feature vector has no positive entry");
  // Exact division keeps every entry <= 1 and the maximum at exactly 1.
  fv.rows /= top;
  return fv;
}

}  // namespace lapshape
