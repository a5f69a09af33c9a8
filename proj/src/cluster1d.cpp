#include "lapshape/cluster1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lapshape {

KMeans1D kmeans_1d(std::span<const double> values, std::size_t k, int max_iterations) {
  KMeans1D out;
  if (values.empty() || k == 0) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  k = std::min(k, sorted.size());
  out.centroids.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t pos = k == 1 ? sorted.size() / 2 : c * (sorted.size() - 1) / (k - 1);
    out.centroids[c] = sorted[pos];
  }
  out.labels.assign(values.size(), 0);

  auto assign = [&]() {
    bool changed = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = std::abs(values[i] - out.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != out.labels[i]) {
        out.labels[i] = best;
        changed = true;
      }
    }
    return changed;
  };

  assign();
  for (out.iterations = 1; out.iterations <= max_iterations; ++out.iterations) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum[out.labels[i]] += values[i];
      ++count[out.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (count[c] > 0) out.centroids[c] = sum[c] / static_cast<double>(count[c]);
    if (!assign()) break;
  }
  return out;
}

SingleLinkage1D single_linkage_1d(std::span<const double> values, std::size_t target_groups,
                                  double max_gap) {
  SingleLinkage1D out;
  const std::size_t n = values.size();
  out.labels.assign(n, 0);
  if (n == 0) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  // gap g sits between sorted positions g and g+1
  std::vector<std::size_t> gaps(n - 1);
  std::iota(gaps.begin(), gaps.end(), std::size_t{0});
  auto gap_value = [&](std::size_t g) { return values[order[g + 1]] - values[order[g]]; };
  std::stable_sort(gaps.begin(), gaps.end(),
                   [&](std::size_t a, std::size_t b) { return gap_value(a) < gap_value(b); });
  for (std::size_t g : gaps) out.merge_gaps.push_back(gap_value(g));

  std::vector<char> joined(n > 0 ? n - 1 : 0, 0);
  std::size_t groups = n;
  target_groups = std::max<std::size_t>(1, target_groups);
  for (std::size_t g : gaps) {
    if (groups <= target_groups) break;
    if (gap_value(g) > max_gap) break;
    joined[g] = 1;
    --groups;
  }
  std::size_t label = 0;
  out.labels[order[0]] = 0;
  for (std::size_t p = 1; p < n; ++p) {
    if (!joined[p - 1]) ++label;
    out.labels[order[p]] = label;
  }
  out.group_count = label + 1;
  return out;
}

}  // namespace lapshape
