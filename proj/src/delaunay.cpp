#include "lapshape/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "lapshape/error.hpp"

namespace lapshape {

namespace predicates {

namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2;
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

template <typename T>
int sign_of(const T& v) {
  return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

int orient_exact(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Rational ax(a.x()), ay(a.y()), bx(b.x()), by(b.y()), cx(c.x()), cy(c.y());
  const Rational det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
  return sign_of(det);
}

int incircle_exact(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const Rational dx(d.x()), dy(d.y());
  const Rational adx = Rational(a.x()) - dx, ady = Rational(a.y()) - dy;
  const Rational bdx = Rational(b.x()) - dx, bdy = Rational(b.y()) - dy;
  const Rational cdx = Rational(c.x()) - dx, cdy = Rational(c.y()) - dy;
  const Rational alift = adx * adx + ady * ady;
  const Rational blift = bdx * bdx + bdy * bdy;
  const Rational clift = cdx * cdx + cdy * cdy;
  const Rational det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                       clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

}  // namespace

int orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double left = (a.x() - c.x()) * (b.y() - c.y());
  const double right = (a.y() - c.y()) * (b.x() - c.x());
  const double det = left - right;
  const double bound = kOrientBound * (std::abs(left) + std::abs(right));
  if (det > bound || -det > bound) return det > 0 ? 1 : -1;
  return orient_exact(a, b, c);
}

int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                     clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = kIncircleBound * permanent;
  if (det > bound || -det > bound) return det > 0 ? 1 : -1;
  return incircle_exact(a, b, c, d);
}

}  // namespace predicates

namespace {

// Triangle soup with a dense directed-edge lookup; point sets here are small
// (a radius neighborhood), so an m*m table is cheap.
class Mesh2 {
 public:
  explicit Mesh2(std::size_t m) : m_(m), edge_(m * m, -1) {}

  int add(int a, int b, int c) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back({a, b, c});
    link(id);
    return id;
  }

  void replace(int id, int a, int b, int c) {
    unlink(id);
    tris_[static_cast<std::size_t>(id)] = {a, b, c};
    link(id);
  }

  int triangle_with_edge(int u, int v) const { return edge_[key(u, v)]; }
  const Triangle& tri(int id) const { return tris_[static_cast<std::size_t>(id)]; }
  std::vector<Triangle> release() { return std::move(tris_); }
  std::size_t count() const { return tris_.size(); }

 private:
  std::size_t key(int u, int v) const {
    return static_cast<std::size_t>(u) * m_ + static_cast<std::size_t>(v);
  }
  void link(int id) {
    const Triangle& t = tris_[static_cast<std::size_t>(id)];
    for (int e = 0; e < 3; ++e) edge_[key(t[e], t[(e + 1) % 3])] = id;
  }
  void unlink(int id) {
    const Triangle& t = tris_[static_cast<std::size_t>(id)];
    for (int e = 0; e < 3; ++e) {
      auto& slot = edge_[key(t[e], t[(e + 1) % 3])];
      if (slot == id) slot = -1;
    }
  }

  std::size_t m_;
  std::vector<Triangle> tris_;
  std::vector<int> edge_;
};

int opposite(const Triangle& t, int u, int v) {
  for (int x : t)
    if (x != u && x != v) return x;
  return -1;
}

}  // namespace

std::vector<Triangle> delaunay_2d(std::span<const Vec2> points) {
  using predicates::incircle;
  using predicates::orient2d;

  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Vec2& pa = points[static_cast<std::size_t>(a)];
    const Vec2& pb = points[static_cast<std::size_t>(b)];
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    return a < b;
  });
  // Exact duplicates are adjacent after sorting; keep the lowest index.
  order.erase(std::unique(order.begin(), order.end(),
                          [&](int a, int b) {
                            return points[static_cast<std::size_t>(a)] ==
                                   points[static_cast<std::size_t>(b)];
                          }),
              order.end());

  auto P = [&](int i) -> const Vec2& { return points[static_cast<std::size_t>(i)]; };

  std::size_t first_off = 2;
  while (first_off < order.size() &&
         orient2d(P(order[0]), P(order[1]), P(order[first_off])) == 0)
    ++first_off;
  if (order.size() < 3 || first_off == order.size()) {
    throw Error(ErrorCode::DegenerateNeighborhood, "collinear point set cannot be triangulated");
  }

  Mesh2 mesh(points.size());
  std::vector<int> hull;  // counter-clockwise

  // Fan the initial collinear chain to the first off-line point.
  const int apex = order[first_off];
  const bool left = orient2d(P(order[0]), P(order[1]), P(apex)) > 0;
  for (std::size_t i = 0; i + 1 < first_off; ++i) {
    if (left) mesh.add(order[i], order[i + 1], apex);
    else mesh.add(order[i + 1], order[i], apex);
  }
  if (left) {
    for (std::size_t i = 0; i < first_off; ++i) hull.push_back(order[i]);
    hull.push_back(apex);
  } else {
    hull.push_back(order[0]);
    hull.push_back(apex);
    for (std::size_t i = first_off - 1; i >= 1; --i) hull.push_back(order[i]);
  }

  std::vector<char> visible;
  for (std::size_t s = first_off + 1; s < order.size(); ++s) {
    const int q = order[s];
    const std::size_t h = hull.size();
    visible.assign(h, 0);
    for (std::size_t j = 0; j < h; ++j)
      visible[j] = orient2d(P(hull[j]), P(hull[(j + 1) % h]), P(q)) < 0;
    std::size_t start = h;
    for (std::size_t j = 0; j < h; ++j) {
      if (visible[j] && !visible[(j + h - 1) % h]) {
        start = j;
        break;
      }
    }
    if (start == h) {
      // Either nothing is visible (impossible for a point outside the hull)
      // or every edge is; both indicate a broken invariant.
      throw Error(ErrorCode::DegenerateNeighborhood, "hull visibility failure during sweep");
    }
    std::size_t run = 0;
    while (visible[(start + run) % h]) {
      const int a = hull[(start + run) % h];
      const int b = hull[(start + run + 1) % h];
      mesh.add(a, q, b);
      ++run;
    }
    std::vector<int> next;
    next.reserve(h + 1);
    next.push_back(hull[start]);
    next.push_back(q);
    for (std::size_t j = start + run; j != start + h; ++j) {
      const std::size_t idx = j % h;
      if (idx == start) break;
      next.push_back(hull[idx]);
    }
    hull = std::move(next);
  }

  // Lawson flips until every interior edge is locally Delaunay.
  std::vector<std::pair<int, int>> stack;
  for (std::size_t t = 0; t < mesh.count(); ++t) {
    const Triangle tri = mesh.tri(static_cast<int>(t));
    for (int e = 0; e < 3; ++e) stack.emplace_back(tri[e], tri[(e + 1) % 3]);
  }
  while (!stack.empty()) {
    auto [u, v] = stack.back();
    stack.pop_back();
    const int t1 = mesh.triangle_with_edge(u, v);
    const int t2 = mesh.triangle_with_edge(v, u);
    if (t1 < 0 || t2 < 0) continue;
    const int a = opposite(mesh.tri(t1), u, v);
    const int b = opposite(mesh.tri(t2), u, v);
    // t1 = (u, v, a) and t2 = (v, u, b) up to rotation, both counter-clockwise.
    if (incircle(P(u), P(v), P(a), P(b)) <= 0) continue;
    mesh.replace(t1, a, u, b);
    mesh.replace(t2, b, v, a);
    stack.emplace_back(u, b);
    stack.emplace_back(b, v);
    stack.emplace_back(v, a);
    stack.emplace_back(a, u);
  }
  return mesh.release();
}

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

LocalTriangulation triangulate_frame(const LocalFrame& frame, double min_area) {
  LocalTriangulation out;
  out.vertex_area.assign(frame.size(), 0.0);
  for (const Triangle& t : delaunay_2d(frame.projected)) {
    const double area = triangle_area(frame.projected[static_cast<std::size_t>(t[0])],
                                      frame.projected[static_cast<std::size_t>(t[1])],
                                      frame.projected[static_cast<std::size_t>(t[2])]);
    if (area <= min_area) continue;
    out.triangles.push_back(t);
    for (int v : t) out.vertex_area[static_cast<std::size_t>(v)] += area;
  }
  return out;
}

}  // namespace lapshape
