#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>

#include "lapshape/cluster1d.hpp"
#include "lapshape/error.hpp"
#include "lapshape/segmentation.hpp"

namespace lapshape {

namespace {

constexpr std::size_t kEdgeStepNeighbors = 8;

struct Region {
  bool alive = true;
  std::size_t size = 0;
  double kappa_sum = 0.0;
  // neighbor region -> boundary points shared with it
  std::map<int, std::vector<PointId>> boundary;

  double mean() const { return kappa_sum / static_cast<double>(size); }
};

void add_boundary(std::vector<Region>& regions, int a, int b, PointId p) {
  regions[static_cast<std::size_t>(a)].boundary[b].push_back(p);
  regions[static_cast<std::size_t>(b)].boundary[a].push_back(p);
}

}  // namespace

Segmentation curvature_segment(const PointCloud& cloud, double r, const std::vector<PointId>& edges,
                               const std::vector<double>& kappa, std::size_t k_seeds,
                               const CurvatureStop& stop) {
  const std::size_t n = cloud.size();
  if (kappa.size() != n) throw Error(ErrorCode::InvalidInput, "curvature proxy size does not match the cloud");
  if (k_seeds == 0) throw Error(ErrorCode::InvalidInput, "seed class count must be at least 1");
  std::vector<bool> is_edge(n, false);
  for (PointId e : edges) {
    if (e >= n) throw Error(ErrorCode::InvalidInput, "edge point id out of range");
    is_edge[e] = true;
  }
  std::vector<PointId> interior;
  for (PointId p = 0; p < n; ++p)
    if (!is_edge[p]) interior.push_back(p);
  if (interior.empty()) throw Error(ErrorCode::InvalidInput, "every point is an edge point");

  std::vector<std::vector<PointId>> nbrs(n);
  for (PointId p = 0; p < n; ++p) nbrs[p] = radius_neighbors(cloud, p, r);

  std::vector<double> interior_kappa;
  for (PointId p : interior) interior_kappa.push_back(kappa[p]);
  const auto classes = kmeans_1d(interior_kappa, std::min(k_seeds, interior.size()));
  std::vector<std::size_t> cls(n, 0);
  for (std::size_t i = 0; i < interior.size(); ++i) cls[interior[i]] = classes.labels[i];

  // Seed regions: breadth-first over interior neighbors of the same class.
  std::vector<int> region(n, -1);
  std::vector<Region> regions;
  std::vector<PointId> queue;
  for (PointId s : interior) {
    if (region[s] >= 0) continue;
    const int id = static_cast<int>(regions.size());
    regions.emplace_back();
    region[s] = id;
    queue.assign(1, s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const PointId p = queue[head];
      regions.back().size += 1;
      regions.back().kappa_sum += kappa[p];
      for (PointId q : nbrs[p])
        if (!is_edge[q] && region[q] < 0 && cls[q] == cls[p]) {
          region[q] = id;
          queue.push_back(q);
        }
    }
  }

  // Boundaries: touching interior points of two regions, and edge points
  // within reach of both.
  for (PointId p : interior)
    for (PointId q : nbrs[p])
      if (!is_edge[q] && region[q] != region[p] && p < q) {
        add_boundary(regions, region[p], region[q], p);
        add_boundary(regions, region[p], region[q], q);
      }
  std::vector<int> touching;
  for (PointId e : edges) {
    touching.clear();
    for (PointId q : nbrs[e])
      if (!is_edge[q]) touching.push_back(region[q]);
    std::sort(touching.begin(), touching.end());
    touching.erase(std::unique(touching.begin(), touching.end()), touching.end());
    for (std::size_t i = 0; i < touching.size(); ++i)
      for (std::size_t j = i + 1; j < touching.size(); ++j) add_boundary(regions, touching[i], touching[j], e);
  }
  auto weight = [&](int a, int b) {
    auto& pts = regions[static_cast<std::size_t>(a)].boundary[b];
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double sum = 0.0;
    for (PointId p : pts) sum += kappa[p];
    const double boundary_mean = pts.empty() ? 0.0 : sum / static_cast<double>(pts.size());
    return std::abs(regions[static_cast<std::size_t>(a)].mean() - regions[static_cast<std::size_t>(b)].mean()) +
           boundary_mean;
  };

  // Merge across the cheapest adjacency until the stop rule holds.
  std::size_t alive = regions.size();
  for (;;) {
    if (stop.target_count > 0 && alive <= stop.target_count) break;
    double best = std::numeric_limits<double>::infinity();
    int ba = -1, bb = -1;
    for (std::size_t a = 0; a < regions.size(); ++a) {
      if (!regions[a].alive) continue;
      for (auto& [b, pts] : regions[a].boundary) {
        if (b <= static_cast<int>(a)) continue;
        const double w = weight(static_cast<int>(a), b);
        if (w < best) {
          best = w;
          ba = static_cast<int>(a);
          bb = b;
        }
      }
    }
    if (ba < 0 || best > stop.max_edge_value) break;

    Region& A = regions[static_cast<std::size_t>(ba)];
    Region& B = regions[static_cast<std::size_t>(bb)];
    A.size += B.size;
    A.kappa_sum += B.kappa_sum;
    A.boundary.erase(bb);
    for (auto& [c, pts] : B.boundary) {
      if (c == ba) continue;
      Region& C = regions[static_cast<std::size_t>(c)];
      auto& ac = A.boundary[c];
      ac.insert(ac.end(), pts.begin(), pts.end());
      auto& ca = C.boundary[ba];
      ca.insert(ca.end(), pts.begin(), pts.end());
      C.boundary.erase(bb);
    }
    B.boundary.clear();
    B.alive = false;
    for (PointId p = 0; p < n; ++p)
      if (region[p] == bb) region[p] = ba;
    --alive;
  }

  // Edge points join last. Each one goes to the region that reaches it first
  // along paths through its nearest points; regions reaching it at the same
  // distance are split by nearest mean kappa.
  std::vector<PointId> pending(edges.begin(), edges.end());
  std::sort(pending.begin(), pending.end());
  pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
  std::vector<std::vector<PointId>> step(n), reached_from(n);
  for (PointId e : pending)
    for (const auto& [d2, q] : cloud.index().knn(cloud[e], kEdgeStepNeighbors, e)) {
      step[e].push_back(q);
      reached_from[q].push_back(e);
    }
  struct Arrival {
    double dist = std::numeric_limits<double>::infinity();
    double kappa_gap = std::numeric_limits<double>::infinity();
    int region = -1;
    bool operator<(const Arrival& o) const {
      if (dist != o.dist) return dist < o.dist;
      if (kappa_gap != o.kappa_gap) return kappa_gap < o.kappa_gap;
      return region < o.region;
    }
  };
  std::vector<Arrival> best(n);
  using Entry = std::pair<double, PointId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  auto offer = [&](PointId e, double dist, int rq) {
    const Arrival a{dist, std::abs(kappa[e] - regions[static_cast<std::size_t>(rq)].mean()), rq};
    if (a < best[e]) {
      best[e] = a;
      frontier.emplace(dist, e);
    }
  };
  for (PointId e : pending)
    for (PointId q : step[e])
      if (!is_edge[q]) offer(e, (cloud[e] - cloud[q]).norm(), region[q]);
  while (!frontier.empty()) {
    const auto [dist, e] = frontier.top();
    frontier.pop();
    if (region[e] >= 0 || dist > best[e].dist) continue;
    region[e] = best[e].region;
    for (PointId f : reached_from[e])
      if (region[f] < 0) offer(f, dist + (cloud[f] - cloud[e]).norm(), region[e]);
  }
  std::vector<PointId> rest;
  for (PointId e : pending)
    if (region[e] < 0) rest.push_back(e);
  if (!rest.empty()) {
    // Edge points out of reach of every region form one extra region.
    Region extra;
    extra.size = rest.size();
    for (PointId e : rest) extra.kappa_sum += kappa[e];
    const int id = static_cast<int>(regions.size());
    regions.push_back(std::move(extra));
    for (PointId e : rest) region[e] = id;
  }

  Segmentation seg;
  seg.labels.assign(n, -1);
  std::vector<int> dense(regions.size(), -1);
  for (PointId p = 0; p < n; ++p) {
    const auto rp = static_cast<std::size_t>(region[p]);
    if (dense[rp] < 0) {
      dense[rp] = static_cast<int>(seg.segment_max.size());
      seg.segment_max.push_back({p, kappa[p]});
    }
    const int l = dense[rp];
    seg.labels[p] = l;
    SegmentMax& m = seg.segment_max[static_cast<std::size_t>(l)];
    if (kappa[p] > m.value) m = {p, kappa[p]};
  }
  return seg;
}

}  // namespace lapshape
