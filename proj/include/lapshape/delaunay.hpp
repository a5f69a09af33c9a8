#pragma once

#include <array>
#include <span>
#include <vector>

#include "lapshape/local_frame.hpp"

namespace lapshape {

namespace predicates {

// Sign of twice the signed area of (a, b, c): >0 counter-clockwise.
// Exact for double inputs (filtered, with an exact rational fallback).
int orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

// >0 when d lies strictly inside the circumcircle of counter-clockwise (a, b, c).
int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

}  // namespace predicates

using Triangle = std::array<int, 3>;

// Delaunay triangulation of a 2D point set. Triangles are counter-clockwise
// index triples. Exactly duplicated points keep only their lowest index.
// Cocircular ties resolve to the triangulation produced by the
// lexicographic (x, y, index) sweep. Throws DegenerateNeighborhood when all
// points are collinear.
std::vector<Triangle> delaunay_2d(std::span<const Vec2> points);

struct LocalTriangulation {
  std::vector<Triangle> triangles;  // indices into the frame's neighbor list
  std::vector<double> vertex_area;  // per local index; sum of incident triangle areas

  double area_of_local(std::size_t local) const { return vertex_area[local]; }
};

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c);

// Triangulates the projected neighborhood. Triangles with area <= min_area are
// discarded before vertex areas are accumulated.
LocalTriangulation triangulate_frame(const LocalFrame& frame, double min_area = 0.0);

}  // namespace lapshape
