#include <algorithm>
#include <numeric>
#include <string>

#include "lapshape/cluster1d.hpp"
#include "lapshape/error.hpp"
#include "lapshape/segmentation.hpp"

namespace lapshape {

std::vector<double> segment_max_values(const Segmentation& seg) {
  std::vector<double> out;
  out.reserve(seg.segment_count());
  for (const auto& m : seg.segment_max) out.push_back(m.value);
  return out;
}

TypeGrouping recluster_by_type(const std::vector<double>& criterion, const TypeStop& stop) {
  if (criterion.empty()) throw Error(ErrorCode::InvalidInput, "type grouping needs at least one segment");
  if (stop.type_count > criterion.size())
    throw Error(ErrorCode::InvalidInput, "requested " + std::to_string(stop.type_count) + " types from " +
                                             std::to_string(criterion.size()) + " segments");
  if (!(stop.threshold >= 0.0)) throw Error(ErrorCode::InvalidInput, "type threshold must be >= 0");
  const auto groups = single_linkage_1d(criterion, stop.type_count, stop.threshold);
  TypeGrouping out;
  out.type_count = groups.group_count;
  out.merge_thresholds = groups.merge_gaps;
  for (std::size_t l : groups.labels) out.segment_type.push_back(static_cast<int>(l));
  return out;
}

BalanceResult clustering_balance(const std::vector<double>& values, std::size_t k_min, std::size_t k_max) {
  if (values.size() < 2) throw Error(ErrorCode::InvalidInput, "clustering balance needs at least 2 values");
  k_min = std::max<std::size_t>(1, k_min);
  k_max = std::min(k_max, values.size());
  if (k_min > k_max) throw Error(ErrorCode::InvalidInput, "empty k range for clustering balance");

  const double global = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, v * v);
  // Scores closer than this are ties (centroids of equal values can differ
  // by a rounding step).
  const double tie = 1e-12 * scale;
  BalanceResult out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const auto groups = single_linkage_1d(values, k, std::numeric_limits<double>::infinity());
    std::vector<double> sum(groups.group_count, 0.0);
    std::vector<std::size_t> count(groups.group_count, 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum[groups.labels[i]] += values[i];
      ++count[groups.labels[i]];
    }
    std::vector<double> centroid(groups.group_count);
    double inter = 0.0;
    for (std::size_t g = 0; g < groups.group_count; ++g) {
      centroid[g] = sum[g] / static_cast<double>(count[g]);
      inter += (centroid[g] - global) * (centroid[g] - global);
    }
    double intra = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - centroid[groups.labels[i]];
      intra += d * d;
    }
    const double score = intra + inter;
    out.ks.push_back(k);
    out.scores.push_back(score);
    if (score < best - tie) {
      best = score;
      out.argmin = k;
    }
  }
  return out;
}

}  // namespace lapshape
