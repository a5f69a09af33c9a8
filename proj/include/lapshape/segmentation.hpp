#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "lapshape/laplacian.hpp"
#include "lapshape/point_cloud.hpp"

namespace lapshape {

// Label given to points removed by remove_small_segments.
inline constexpr int kCulled = -1;

struct SegmentMax {
  PointId point = 0;
  double value = 0.0;
};

struct Segmentation {
  std::vector<int> labels;  // dense 0..S-1, or kCulled
  std::vector<SegmentMax> segment_max;
  double reference_scale = 0.0;  // diffusion time of the criterion field
  std::size_t nu = 0;
  double tau = 0.0;
  std::size_t component_count = 1;  // of the neighbor graph

  std::size_t segment_count() const { return segment_max.size(); }
  std::vector<std::size_t> segment_sizes() const;
};

// birth = segment maximum, death = value of the point where it met a higher
// segment, lifespan = birth - death. Essential pairs (one per connected
// component) never die: death = -inf, lifespan = +inf.
struct PersistencePair {
  double birth = 0.0;
  double death = 0.0;
  double lifespan = 0.0;
  PointId peak = 0;
  bool essential = false;
};

using NeighborGraph = std::vector<std::vector<PointId>>;

// Top-nu |weight| entries of every stiffness row, symmetrized by union.
NeighborGraph nu_graph(const SpclOperator& op, std::size_t nu);

std::size_t count_components(const NeighborGraph& graph);

struct PersistenceResult {
  Segmentation segmentation;
  std::vector<PersistencePair> pairs;  // in death order, essentials last
};

// Persistence clustering of a scalar field over a neighbor graph. Points are
// swept in descending value (ties by index); a point with no processed
// neighbor seeds a segment, otherwise it joins the adjacent segment with the
// highest maximum. When a point touches several segments, each lower one
// whose birth minus the point's value is <= tau merges into the highest.
PersistenceResult persistence_segment(const NeighborGraph& graph, const Eigen::VectorXd& values,
                                      double tau);
PersistenceResult persistence_segment(const SpclOperator& op, const Eigen::VectorXd& values,
                                      std::size_t nu, double tau);

// Midpoint between the s-th and (s+1)-th largest lifespans (essentials count
// as infinite). Throws AmbiguousCut when tied lifespans straddle the cut.
double tau_for_segment_count(const std::vector<PersistencePair>& pairs, std::size_t s);

struct CullResult {
  Segmentation segmentation;
  std::vector<PointId> culled;
};

// Drops segments with fewer than fraction * n points.
CullResult remove_small_segments(const Segmentation& seg, double fraction = 0.01);

struct HeatKernelMatrix;

inline constexpr int kDissipator = -1;

struct HeatWalkResult {
  std::vector<PointId> exemplars;  // one per accumulator region
  std::vector<int> assignment;     // region index, or kDissipator
  std::vector<PointId> exemplar_of;  // converged exemplar map e(x)
  std::vector<double> potential;     // converged heat potential s(x)
  std::size_t iterations = 0;
  bool converged = false;
  bool clamped_negative = false;

  std::size_t region_count() const { return exemplars.size(); }
};

inline constexpr std::size_t kHeatWalkMaxIterations = 200;

HeatWalkResult heat_walk(const HeatKernelMatrix& K, std::size_t max_iterations = kHeatWalkMaxIterations);

// One exemplar/potential update. Exposed so callers can check the fixed point.
void heat_walk_step(const Eigen::MatrixXd& K, const std::vector<PointId>& exemplar_of,
                    const std::vector<double>& potential, std::vector<PointId>& next_exemplar,
                    std::vector<double>& next_potential);

// Per-segment criterion for recluster_by_type from a Heat Walk: HKS at each
// exemplar, then (if any point is a dissipator) the mean HKS of the
// non-dissipator points for the dissipator region, appended last.
std::vector<double> heat_walk_type_criteria(const HeatWalkResult& walk, const Eigen::VectorXd& hks);

struct CurvatureStop {
  std::size_t target_count = 0;  // 0 disables
  double max_edge_value = std::numeric_limits<double>::infinity();
};

// Seeded region growing on a curvature proxy: kappa classes from 1D k-means
// seed regions grown over non-edge r-neighbors, regions merge across the
// cheapest adjacency (|mean kappa difference| + mean boundary kappa) until
// the stop rule holds, and edge points join last, each to the region that
// reaches it first through nearest-point paths (equal arrivals go to the
// nearest mean kappa). segment_max records each segment's kappa maximum.
Segmentation curvature_segment(const PointCloud& cloud, double r, const std::vector<PointId>& edges,
                               const std::vector<double>& kappa, std::size_t k_seeds,
                               const CurvatureStop& stop);

struct TypeGrouping {
  std::vector<int> segment_type;
  std::size_t type_count = 0;
  std::vector<double> merge_thresholds;  // every gap of the 1D filtration, ascending
};

struct TypeStop {
  std::size_t type_count = 0;  // 0 disables
  double threshold = std::numeric_limits<double>::infinity();
};

// 0-dimensional Vietoris-Rips grouping (single linkage on the number line).
TypeGrouping recluster_by_type(const std::vector<double>& criterion, const TypeStop& stop);

// Segment maxima of a segmentation, in segment order.
std::vector<double> segment_max_values(const Segmentation& seg);

struct BalanceResult {
  std::vector<std::size_t> ks;
  std::vector<double> scores;
  std::size_t argmin = 1;
};

// Intra- plus inter-cluster sum of squares for single-linkage groupings of
// the values into each k in [k_min, k_max] (clamped to the value count).
BalanceResult clustering_balance(const std::vector<double>& values, std::size_t k_min, std::size_t k_max);

}  // namespace lapshape
