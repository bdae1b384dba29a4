// Copyright 2026 The piou Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIOU_GEOMETRY_HPP_
#define PIOU_GEOMETRY_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace piou {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

// Relative tolerances. Lengths are scaled by L (a bounding-box diagonal of
// the geometry involved) so every test is invariant under uniform scaling.
namespace tol {
inline constexpr double kParallel = 1e-12;   // |D| < kParallel * L^2
inline constexpr double kRange = 1e-9;       // range-filter slack, times L
inline constexpr double kDuplicate = 1e-9;   // merge radius, times L
inline constexpr double kAngleTie = 1e-12;   // radians
}  // namespace tol

// How strictly convexity is enforced by the scalar API. Lenient runs the
// same enumeration on non-convex input; the result is then approximate.
enum class Convexity { kStrict, kLenient };

/// An ordered list of at least three finite vertices with no two consecutive
/// vertices closer than tol::kDuplicate times the bounding-box diagonal.
class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(std::vector<Point2> vertices);

  /// Drops consecutive near-duplicates (cyclically) before validating. Used
  /// for optimizer outputs that may have collapsed edges.
  static Polygon from_points_merged(std::span<const Point2> points);

  std::span<const Point2> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Point2& operator[](std::size_t i) const { return vertices_[i]; }

 private:
  std::vector<Point2> vertices_;
};

Point2 centroid(std::span<const Point2> points);
Point2 centroid(const Polygon& poly);

/// Bounding-box diagonal of the given points, the L used by the tolerances.
double bbox_diagonal(std::span<const Point2> points);

/// True when every point lies within kParallel * L^2 (in cross-product
/// terms) of a single line through the first two distinct points.
bool is_collinear(std::span<const Point2> points);

/// Convex in the given order: consecutive turns never change sign and wind
/// exactly once. Collinear consecutive triples are allowed.
bool is_convex(std::span<const Point2> points);

/// Permutation that lists the points clockwise about their centroid,
/// starting from points[0]. Ties in angle are broken by increasing distance
/// from the centroid.
std::vector<std::size_t> clockwise_permutation(std::span<const Point2> points);

/// Throws Error(kDegenerate) when all vertices are collinear.
Polygon order_clockwise(const Polygon& poly);

/// Intersection of segments p1-p2 and p3-p4 via the line-line determinant
/// formula, kept only when the lines are not parallel and the point lies in
/// both segments' x and y ranges (inclusive, with kRange slack).
std::optional<Point2> segment_intersection(Point2 p1, Point2 p2, Point2 p3, Point2 p4);

/// (y - y1)(x2 - x1) - (x - x1)(y2 - y1): positive left of a->b, negative
/// right, zero on the line.
double point_side(Point2 pt, Point2 a, Point2 b);

/// Candidates lying on the same side of every edge of the container,
/// boundary included. The container must be convex unless lenient.
std::vector<Point2> points_inside(const Polygon& candidates, const Polygon& container,
                                  Convexity mode = Convexity::kStrict);

enum class Provenance { kEdgeEdge, kAInsideB, kBInsideA };

struct IntersectionPoint {
  Point2 point;
  Provenance origin = Provenance::kEdgeEdge;
  // Vertex index for interior points; edge start index for edge-edge
  // points (edge i runs from vertex i to vertex i+1 mod n). -1 if unused.
  int a_index = -1;
  int b_index = -1;
};

struct IntersectionSet {
  std::vector<IntersectionPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::vector<Point2> coordinates() const;
};

/// Edge-edge intersections, then vertices of a inside b, then vertices of b
/// inside a, merging points within kDuplicate of one already kept. Both
/// polygons are taken in the order given (clockwise expected).
IntersectionSet intersection_vertices(const Polygon& a, const Polygon& b);

/// Absolute shoelace area. Repeated points contribute nothing; fewer than
/// three points give 0.
double shoelace_area(std::span<const Point2> points);
double shoelace_area(const Polygon& poly);

struct PairResult {
  double iou = 0.0;
  double area_a = 0.0;
  double area_b = 0.0;
  double area_i = 0.0;
  // Set when either input has zero area; iou is then 0.
  bool degenerate = false;
};

/// Exact IoU of two convex polygons given in any vertex order.
PairResult piou_pair(const Polygon& a, const Polygon& b, Convexity mode = Convexity::kStrict);

}  // namespace piou

#endif  // PIOU_GEOMETRY_HPP_
