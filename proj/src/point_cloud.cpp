#include "lapshape/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lapshape/error.hpp"

namespace lapshape {

AxisBox bounding_box(std::span<const Vec3> points) {
  AxisBox box{Vec3::Constant(std::numeric_limits<double>::infinity()),
              Vec3::Constant(-std::numeric_limits<double>::infinity())};
  for (const Vec3& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

namespace {

double spacing_with(const KdTree& tree, std::span<const Vec3> points) {
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nn = tree.knn(points[i], 1, i);
    sum += std::sqrt(nn.front().first);
  }
  return sum / static_cast<double>(points.size());
}

}  // namespace

double estimate_spacing(std::span<const Vec3> points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::InvalidInput, "spacing needs at least 2 points, got " +
                                             std::to_string(points.size()));
  }
  const KdTree tree(points);
  return spacing_with(tree, points);
}

PointCloud PointCloud::from_points(std::vector<Vec3> points, std::size_t* dropped,
                                   std::vector<PointId>* kept_indices) {
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite coordinate in point cloud");
  }
  if (points.size() < 2) {
    throw Error(ErrorCode::InvalidInput,
                "point cloud needs at least 2 points, got " + std::to_string(points.size()));
  }

  // Drop near-coincident points, keeping the lowest index of each cluster.
  const double tol = 1e-12 * bounding_box(points).diagonal();
  std::size_t removed = 0;
  {
    const KdTree probe(points);
    std::vector<char> keep(points.size(), 1);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!keep[i]) continue;
      probe.radius_search(points[i], tol, hits);
      for (std::size_t j : hits) {
        if (j > i && keep[j]) {
          keep[j] = 0;
          ++removed;
        }
      }
    }
    if (kept_indices) {
      kept_indices->clear();
      for (std::size_t i = 0; i < points.size(); ++i)
        if (keep[i]) kept_indices->push_back(i);
    }
    if (removed > 0) {
      std::vector<Vec3> kept;
      kept.reserve(points.size() - removed);
      for (std::size_t i = 0; i < points.size(); ++i)
        if (keep[i]) kept.push_back(points[i]);
      points = std::move(kept);
    }
  }
  if (dropped) *dropped = removed;
  if (points.size() < 2) {
    throw Error(ErrorCode::InvalidInput, "all points coincide");
  }

  auto data = std::make_shared<Data>();
  data->points = std::move(points);
  data->tree = KdTree(data->points);
  data->spacing = spacing_with(data->tree, data->points);
  if (!(data->spacing > 0.0)) throw Error(ErrorCode::InvalidInput, "zero point spacing");
  PointCloud cloud;
  cloud.data_ = std::move(data);
  return cloud;
}

std::vector<PointId> radius_neighbors(const PointCloud& cloud, PointId center, double r) {
  std::vector<std::size_t> hits;
  const Vec3& c = cloud[center];
  cloud.index().radius_search(c, r, hits);
  std::vector<std::pair<double, PointId>> keyed;
  keyed.reserve(hits.size());
  for (std::size_t j : hits) {
    if (j == center) continue;
    keyed.emplace_back((cloud[j] - c).squaredNorm(), j);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<PointId> out;
  out.reserve(keyed.size());
  for (const auto& [d2, j] : keyed) out.push_back(j);
  return out;
}

UnitBoxResult normalize_to_unit_box(const PointCloud& cloud) {
  const AxisBox box = cloud.bbox();
  const double extent = box.extent().maxCoeff();
  if (!(extent > 0.0)) throw Error(ErrorCode::InvalidInput, "cloud has zero extent");
  UnitBoxResult result;
  result.scale = 1.0 / extent;
  result.translation = -box.min;
  const double s = result.scale;
  const Vec3 t = result.translation;
  result.cloud = cloud.transformed([&](const Vec3& p) -> Vec3 { return (p + t) * s; });
  return result;
}

}  // namespace lapshape
