#include "lapshape/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lapshape/cluster1d.hpp"
#include "lapshape/delaunay.hpp"
#include "lapshape/error.hpp"
#include "lapshape/local_frame.hpp"

namespace lapshape {

double default_bandwidth(double r, double h) {
  return std::min(kDefaultBandwidthFactor * h, 0.5 * r);
}

double spcl_scale(double eps) {
  const double two_eps = 2.0 * eps;
  return 4.0 / (std::numbers::pi * two_eps * two_eps * two_eps * two_eps);
}

namespace {

SpclRow row_from_frame(const LocalFrame& frame, const LocalTriangulation& tri, double eps) {
  SpclRow row;
  row.center = frame.center_index;
  row.center_area = tri.vertex_area[0];
  const double scale = spcl_scale(eps);
  const double inv_four_eps2 = 1.0 / (4.0 * eps * eps);
  const Vec2& c = frame.projected[0];
  for (std::size_t local = 1; local < frame.size(); ++local) {
    const double area = tri.vertex_area[local];
    if (area <= 0.0) continue;
    const double d2 = (frame.projected[local] - c).squaredNorm();
    const double w = -scale * (row.center_area * area / 9.0) * std::exp(-d2 * inv_four_eps2);
    if (w != 0.0) row.weights.emplace_back(frame.neighbor_indices[local], w);
  }
  return row;
}

}  // namespace

SpclRow assemble_spcl_row(const PointCloud& cloud, PointId i, double r, double eps) {
  if (eps <= 0.0) eps = default_bandwidth(r, cloud.spacing());
  const LocalFrame frame = build_local_frame(cloud, i, r);
  const double h = cloud.spacing();
  const LocalTriangulation tri = triangulate_frame(frame, 1e-14 * h * h);
  SpclRow row = row_from_frame(frame, tri, eps);
  if (!(row.center_area > 0.0)) {
    throw Error(ErrorCode::DegenerateNeighborhood, "center point has zero local area",
                {static_cast<std::int64_t>(i)});
  }
  return row;
}

SpclAssembly assemble_spcl_with_normals(const PointCloud& cloud, double r, double eps) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidInput, "assembly radius must be positive");
  if (eps <= 0.0) eps = default_bandwidth(r, cloud.spacing());
  const std::size_t n = cloud.size();
  const double h = cloud.spacing();

  SpclAssembly out;
  out.normals.assign(n, Vec3::Zero());
  Eigen::VectorXd area(static_cast<Eigen::Index>(n));
  std::vector<SpclRow> rows(n);
  std::vector<std::int64_t> sparse, degenerate;

  for (PointId i = 0; i < n; ++i) {
    try {
      const LocalFrame frame = build_local_frame(cloud, i, r);
      out.normals[i] = frame.normal;
      const LocalTriangulation tri = triangulate_frame(frame, 1e-14 * h * h);
      rows[i] = row_from_frame(frame, tri, eps);
      if (!(rows[i].center_area > 0.0)) {
        degenerate.push_back(static_cast<std::int64_t>(i));
        continue;
      }
      area[static_cast<Eigen::Index>(i)] = rows[i].center_area;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InsufficientSampling) sparse.push_back(static_cast<std::int64_t>(i));
      else degenerate.push_back(static_cast<std::int64_t>(i));
    }
  }
  if (!sparse.empty()) {
    throw Error(ErrorCode::InsufficientSampling,
                "points with fewer than 3 neighbors within r = " + std::to_string(r), sparse);
  }
  if (!degenerate.empty()) {
    throw Error(ErrorCode::DegenerateNeighborhood, "points with degenerate neighborhoods",
                degenerate);
  }

  // Gather one-sided entries keyed by (min, max) so both halves of a pair
  // meet; a missing half counts as zero.
  struct Half {
    PointId lo, hi;
    double w_lo_hi;  // entry in row lo
    double w_hi_lo;  // entry in row hi
  };
  std::vector<std::tuple<PointId, PointId, bool, double>> halves;
  for (PointId i = 0; i < n; ++i) {
    for (const auto& [j, w] : rows[i].weights) {
      if (i < j) halves.emplace_back(i, j, true, w);
      else halves.emplace_back(j, i, false, w);
    }
  }
  std::sort(halves.begin(), halves.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a), std::get<2>(a)) <
           std::tie(std::get<0>(b), std::get<1>(b), std::get<2>(b));
  });
  std::vector<Half> pairs;
  for (const auto& [lo, hi, from_lo, w] : halves) {
    if (pairs.empty() || pairs.back().lo != lo || pairs.back().hi != hi)
      pairs.push_back({lo, hi, 0.0, 0.0});
    (from_lo ? pairs.back().w_lo_hi : pairs.back().w_hi_lo) = w;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * pairs.size() + n);
  for (const Half& p : pairs) {
    const double w = 0.5 * (p.w_lo_hi + p.w_hi_lo);
    if (w == 0.0) continue;
    triplets.emplace_back(static_cast<int>(p.lo), static_cast<int>(p.hi), w);
    triplets.emplace_back(static_cast<int>(p.hi), static_cast<int>(p.lo), w);
  }
  SparseMatrix W(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  W.setFromTriplets(triplets.begin(), triplets.end());

  // Diagonal re-fix: each diagonal is minus the sum of its (symmetric) row.
  std::vector<double> diag(n, 0.0);
  for (Eigen::Index col = 0; col < W.outerSize(); ++col) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(W, col); it; ++it) sum += it.value();
    diag[static_cast<std::size_t>(col)] = -sum;
  }
  for (PointId i = 0; i < n; ++i)
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[i]);
  W.setFromTriplets(triplets.begin(), triplets.end());
  W.makeCompressed();

  out.op.stiffness = std::move(W);
  out.op.mass = area / 3.0;
  out.op.radius = r;
  out.op.bandwidth = eps;
  return out;
}

SpclOperator assemble_spcl(const PointCloud& cloud, double r, double eps) {
  return assemble_spcl_with_normals(cloud, r, eps).op;
}

std::vector<std::pair<PointId, double>> row_neighbors(const SpclOperator& op, PointId i) {
  if (i >= op.size()) throw Error(ErrorCode::InvalidInput, "row id out of range");
  std::vector<std::pair<PointId, double>> out;
  // Column i equals row i by symmetry.
  for (SparseMatrix::InnerIterator it(op.stiffness, static_cast<Eigen::Index>(i)); it; ++it) {
    const auto j = static_cast<PointId>(it.row());
    if (j != i && it.value() != 0.0) out.emplace_back(j, it.value());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const double wa = std::abs(a.second), wb = std::abs(b.second);
    if (wa != wb) return wa > wb;
    return a.first < b.first;
  });
  return out;
}

RingEstimate ring_estimate(const SpclOperator& op, PointId i) {
  const auto nbrs = row_neighbors(op, i);
  RingEstimate out;
  std::vector<double> mags;
  mags.reserve(nbrs.size());
  for (const auto& [j, w] : nbrs) mags.push_back(std::abs(w));

  std::vector<double> distinct = mags;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  out.degenerate = distinct.size() < 3;

  // Cluster 0 holds the largest weights (nearest points).
  std::vector<int> cluster(nbrs.size(), 2);
  if (!nbrs.empty()) {
    const KMeans1D km = kmeans_1d(mags, 3);
    const std::size_t k = km.centroids.size();
    for (std::size_t a = 0; a < nbrs.size(); ++a) {
      // centroids ascending; map the highest centroid to cluster 0
      const std::size_t rank_from_top = k - 1 - km.labels[a];
      cluster[a] = static_cast<int>(std::min<std::size_t>(rank_from_top, 2));
    }
  }
  for (std::size_t a = 0; a < nbrs.size(); ++a) {
    for (int ring = cluster[a]; ring < 3; ++ring)
      out.rings[static_cast<std::size_t>(ring)].push_back(nbrs[a].first);
  }
  for (auto& ring : out.rings) std::sort(ring.begin(), ring.end());
  return out;
}

double max_relative_row_sum(const SpclOperator& op) {
  double max_diag = 0.0;
  double worst = 0.0;
  for (Eigen::Index col = 0; col < op.stiffness.outerSize(); ++col) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(op.stiffness, col); it; ++it) {
      sum += it.value();
      if (it.row() == col) max_diag = std::max(max_diag, std::abs(it.value()));
    }
    worst = std::max(worst, std::abs(sum));
  }
  return max_diag > 0.0 ? worst / max_diag : worst;
}

}  // namespace lapshape
