#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "lapshape/kdtree.hpp"

namespace lapshape {

using PointId = std::size_t;

// Mean distance from each point to its single nearest neighbor.
// Requires at least two points.
double estimate_spacing(std::span<const Vec3> points);

struct AxisBox {
  Vec3 min;
  Vec3 max;
  Vec3 extent() const { return max - min; }
  double diagonal() const { return extent().norm(); }
};

AxisBox bounding_box(std::span<const Vec3> points);

// Immutable, ordered set of 3D points with a spatial index and cached mean
// nearest-neighbor spacing. Copies share the underlying storage.
class PointCloud {
 public:
  // Points closer than 1e-12 of the bounding-box diagonal to an earlier
  // point are dropped; `dropped` receives how many were removed and
  // `kept_indices` the input positions of the surviving points.
  static PointCloud from_points(std::vector<Vec3> points, std::size_t* dropped = nullptr,
                                std::vector<PointId>* kept_indices = nullptr);

  PointCloud() = default;

  std::size_t size() const { return data_ ? data_->points.size() : 0; }
  bool empty() const { return size() == 0; }
  const Vec3& operator[](PointId i) const { return data_->points[i]; }
  std::span<const Vec3> points() const { return data_->points; }
  double spacing() const { return data_->spacing; }
  const KdTree& index() const { return data_->tree; }
  AxisBox bbox() const { return bounding_box(points()); }

  // Returns a new cloud whose points are `f(p)` for every point p.
  template <typename F>
  PointCloud transformed(F&& f) const {
    std::vector<Vec3> out;
    out.reserve(size());
    for (const Vec3& p : points()) out.push_back(f(p));
    return from_points(std::move(out));
  }

 private:
  struct Data {
    std::vector<Vec3> points;
    KdTree tree;
    double spacing = 0.0;
  };
  std::shared_ptr<const Data> data_;
};

// All points other than `center` within distance r, sorted by distance
// ascending with ties broken by ascending index.
std::vector<PointId> radius_neighbors(const PointCloud& cloud, PointId center, double r);

struct UnitBoxResult {
  PointCloud cloud;
  double scale = 1.0;
  Vec3 translation = Vec3::Zero();  // applied before scaling: p' = (p + translation) * scale
};

// Translates the bounding-box minimum to the origin and scales uniformly so
// the largest extent is 1.
UnitBoxResult normalize_to_unit_box(const PointCloud& cloud);

}  // namespace lapshape
