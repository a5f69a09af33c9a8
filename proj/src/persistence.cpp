#include "lapshape/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lapshape/error.hpp"

namespace lapshape {

std::vector<std::size_t> Segmentation::segment_sizes() const {
  std::vector<std::size_t> sizes(segment_count(), 0);
  for (int l : labels)
    if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

NeighborGraph nu_graph(const SpclOperator& op, std::size_t nu) {
  if (nu == 0) throw Error(ErrorCode::InvalidInput, "nu must be at least 1");
  const std::size_t n = op.size();
  NeighborGraph graph(n);
  for (PointId i = 0; i < n; ++i) {
    const auto row = row_neighbors(op, i);
    const std::size_t take = std::min(nu, row.size());
    for (std::size_t j = 0; j < take; ++j) {
      graph[i].push_back(row[j].first);
      graph[row[j].first].push_back(i);
    }
  }
  for (auto& adj : graph) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return graph;
}

std::size_t count_components(const NeighborGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<bool> seen(n, false);
  std::vector<PointId> stack;
  std::size_t count = 0;
  for (PointId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++count;
    seen[s] = true;
    stack.push_back(s);
    while (!stack.empty()) {
      const PointId p = stack.back();
      stack.pop_back();
      for (PointId q : graph[p])
        if (!seen[q]) {
          seen[q] = true;
          stack.push_back(q);
        }
    }
  }
  return count;
}

namespace {

struct Sweep {
  std::vector<PointId> parent;  // union-find; a root is its cluster's peak
  std::vector<PersistencePair> deaths;

  PointId find(PointId p) {
    while (parent[p] != p) {
      parent[p] = parent[parent[p]];
      p = parent[p];
    }
    return p;
  }
};

// One descending sweep. rank[p] is p's position in the sweep, so a lower
// rank means a higher (or equal-valued, lower-index) point.
Sweep sweep(const NeighborGraph& graph, const Eigen::VectorXd& values, const std::vector<PointId>& order,
            const std::vector<std::size_t>& rank, double tau) {
  const std::size_t n = order.size();
  constexpr PointId kUnvisited = static_cast<PointId>(-1);
  Sweep s;
  s.parent.assign(n, kUnvisited);
  std::vector<PointId> roots;
  for (PointId x : order) {
    roots.clear();
    for (PointId y : graph[x]) {
      if (s.parent[y] == kUnvisited) continue;
      roots.push_back(s.find(y));
    }
    if (roots.empty()) {
      s.parent[x] = x;
      continue;
    }
    std::sort(roots.begin(), roots.end(), [&](PointId a, PointId b) { return rank[a] < rank[b]; });
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    const PointId top = roots.front();
    for (std::size_t i = 1; i < roots.size(); ++i) {
      const PointId c = roots[i];
      const double lifespan = values[static_cast<Eigen::Index>(c)] - values[static_cast<Eigen::Index>(x)];
      if (lifespan <= tau) {
        s.parent[c] = top;
        s.deaths.push_back({values[static_cast<Eigen::Index>(c)], values[static_cast<Eigen::Index>(x)],
                            lifespan, c, false});
      }
    }
    // Joining the highest cluster keeps every merged cluster connected
    // through x, even when x is their only contact.
    s.parent[x] = top;
  }
  return s;
}

}  // namespace

PersistenceResult persistence_segment(const NeighborGraph& graph, const Eigen::VectorXd& values,
                                      double tau) {
  const std::size_t n = graph.size();
  if (static_cast<std::size_t>(values.size()) != n)
    throw Error(ErrorCode::InvalidInput, "field size does not match the neighbor graph");
  if (n == 0) throw Error(ErrorCode::InvalidInput, "empty field");
  if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidInput, "tau must be >= 0");
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i])) throw Error(ErrorCode::InvalidInput, "field contains a non-finite value");

  std::vector<PointId> order(n);
  std::iota(order.begin(), order.end(), PointId{0});
  std::sort(order.begin(), order.end(), [&](PointId a, PointId b) {
    const double va = values[static_cast<Eigen::Index>(a)];
    const double vb = values[static_cast<Eigen::Index>(b)];
    if (va != vb) return va > vb;
    return a < b;
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[order[i]] = i;

  // Pairs come from the sweep in which every contact merges; they do not
  // depend on tau.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Sweep full = sweep(graph, values, order, rank, kInf);
  Sweep cut = std::isinf(tau) ? full : sweep(graph, values, order, rank, tau);

  PersistenceResult out;
  out.pairs = std::move(full.deaths);
  std::size_t components = 0;
  for (PointId p : order) {
    if (full.find(p) != p) continue;
    ++components;
    out.pairs.push_back({values[static_cast<Eigen::Index>(p)], -kInf, kInf, p, true});
  }

  Segmentation& seg = out.segmentation;
  seg.tau = tau;
  seg.component_count = components;
  seg.labels.assign(n, -1);
  std::vector<int> label_of_root(n, -1);
  for (PointId p : order) {
    const PointId root = cut.find(p);
    if (label_of_root[root] < 0) {
      label_of_root[root] = static_cast<int>(seg.segment_max.size());
      seg.segment_max.push_back({root, values[static_cast<Eigen::Index>(root)]});
    }
    seg.labels[p] = label_of_root[root];
  }
  return out;
}

PersistenceResult persistence_segment(const SpclOperator& op, const Eigen::VectorXd& values,
                                      std::size_t nu, double tau) {
  PersistenceResult out = persistence_segment(nu_graph(op, nu), values, tau);
  out.segmentation.nu = nu;
  return out;
}

double tau_for_segment_count(const std::vector<PersistencePair>& pairs, std::size_t s) {
  std::vector<double> lifespans;
  std::size_t essentials = 0;
  for (const auto& p : pairs) {
    lifespans.push_back(p.lifespan);
    if (p.essential) ++essentials;
  }
  const std::size_t total = lifespans.size();
  if (s < 1 || s > total)
    throw Error(ErrorCode::InvalidInput, "requested " + std::to_string(s) + " segments; between 1 and " +
                                             std::to_string(total) + " are possible");
  if (s < essentials)
    throw Error(ErrorCode::InvalidInput, "requested " + std::to_string(s) + " segments but the graph has " +
                                             std::to_string(essentials) + " components");
  std::sort(lifespans.begin(), lifespans.end(), std::greater<>());

  const double upper = lifespans[s - 1];
  if (s == total) {
    if (!(upper > 0.0))
      throw Error(ErrorCode::AmbiguousCut, "zero lifespans cannot be kept apart by any tau >= 0");
    return 0.5 * upper;
  }
  const double lower = lifespans[s];
  if (std::isinf(upper)) return lower > 0.0 ? 2.0 * lower : 1.0;
  const double tau = 0.5 * (upper + lower);
  if (!(tau > lower && tau < upper)) {
    Error e(ErrorCode::AmbiguousCut, "lifespans " + std::to_string(upper) + " and " + std::to_string(lower) +
                                         " tie at the cut between segments " + std::to_string(s) +
                                         " and " + std::to_string(s + 1));
    e.values = {upper, lower};
    throw e;
  }
  return tau;
}

CullResult remove_small_segments(const Segmentation& seg, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw Error(ErrorCode::InvalidInput, "cull fraction must be in [0, 1)");
  const auto sizes = seg.segment_sizes();
  const double limit = fraction * static_cast<double>(seg.labels.size());
  std::vector<int> remap(sizes.size(), kCulled);
  CullResult out;
  out.segmentation = seg;
  out.segmentation.segment_max.clear();
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (static_cast<double>(sizes[s]) < limit) continue;
    remap[s] = static_cast<int>(out.segmentation.segment_max.size());
    out.segmentation.segment_max.push_back(seg.segment_max[s]);
  }
  if (out.segmentation.segment_max.empty())
    throw Error(ErrorCode::InvalidInput, "every segment is below the cull fraction");
  for (std::size_t p = 0; p < seg.labels.size(); ++p) {
    const int l = seg.labels[p];
    const int mapped = l < 0 ? kCulled : remap[static_cast<std::size_t>(l)];
    out.segmentation.labels[p] = mapped;
    if (mapped == kCulled) out.culled.push_back(p);
  }
  return out;
}

}  // namespace lapshape
