#include "lapshape/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace lapshape {

KdTree::KdTree(std::span<const Vec3> points, std::size_t leaf_size)
    : points_(points), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 2);
    build(0, points_.size());
  }
}

int KdTree::build(std::size_t begin, std::size_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  node.hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  for (std::size_t i = begin; i < end; ++i) {
    node.lo = node.lo.cwiseMin(points_[order_[i]]);
    node.hi = node.hi.cwiseMax(points_[order_[i]]);
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= leaf_size_) return id;

  int axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double va = points_[a][axis];
                     const double vb = points_[b][axis];
                     return va < vb || (va == vb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double KdTree::box_distance2(const Node& node, const Vec3& q) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    double d = 0.0;
    if (q[a] < node.lo[a]) d = node.lo[a] - q[a];
    else if (q[a] > node.hi[a]) d = q[a] - node.hi[a];
    d2 += d * d;
  }
  return d2;
}

void KdTree::radius_search(const Vec3& query, double r, std::vector<std::size_t>& out) const {
  out.clear();
  if (nodes_.empty() || r < 0.0) return;
  const double r2 = r * r;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (box_distance2(node, query) > r2) continue;
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        if ((points_[idx] - query).squaredNorm() <= r2) out.push_back(idx);
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
}

std::vector<std::pair<double, std::size_t>> KdTree::knn(const Vec3& query, std::size_t k,
                                                        std::size_t exclude) const {
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> best;  // max-heap on (distance, index)
  if (nodes_.empty() || k == 0) return {};
  auto worst = [&]() {
    return best.size() < k ? std::numeric_limits<double>::infinity() : best.top().first;
  };
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (box_distance2(node, query) > worst()) continue;
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        if (idx == exclude) continue;
        const Entry e{(points_[idx] - query).squaredNorm(), idx};
        if (best.size() < k) best.push(e);
        else if (e < best.top()) {
          best.pop();
          best.push(e);
        }
      }
    } else {
      const Node& l = nodes_[static_cast<std::size_t>(node.left)];
      const Node& r = nodes_[static_cast<std::size_t>(node.right)];
      // Visit the nearer child first.
      if (box_distance2(l, query) <= box_distance2(r, query)) {
        stack.push_back(node.right);
        stack.push_back(node.left);
      } else {
        stack.push_back(node.left);
        stack.push_back(node.right);
      }
    }
  }
  std::vector<Entry> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace lapshape
