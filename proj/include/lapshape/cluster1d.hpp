#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lapshape {

struct KMeans1D {
  std::vector<double> centroids;    // ascending
  std::vector<std::size_t> labels;  // index into centroids
  int iterations = 0;
};

// Lloyd iterations on scalar values. Initial centroids are spread evenly over
// the sorted values (k = 3 gives min, median, max). Empty clusters keep their
// previous centroid. Ties in assignment go to the lower centroid.
KMeans1D kmeans_1d(std::span<const double> values, std::size_t k, int max_iterations = 100);

struct SingleLinkage1D {
  std::vector<std::size_t> labels;    // dense group ids ordered by ascending value
  std::size_t group_count = 0;
  std::vector<double> merge_gaps;     // every gap of the sorted values, ascending
};

// Single-linkage grouping of scalar values (the 0-dimensional Vietoris-Rips
// filtration on a line). Merges adjacent sorted values in ascending gap order
// until `target_groups` remain or the next gap exceeds `max_gap`. Equal gaps
// merge in ascending position order.
SingleLinkage1D single_linkage_1d(std::span<const double> values, std::size_t target_groups,
                                  double max_gap);

}  // namespace lapshape
