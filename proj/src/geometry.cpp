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

#include "piou/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kernels.hpp"
#include "piou/error.hpp"

namespace piou {
namespace {

bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

void require_finite(std::span<const Point2> pts) {
  for (const Point2& p : pts) {
    if (!finite(p)) throw Error(ErrorCode::kNonFinite, "polygon has a non-finite coordinate");
  }
}

double merge_radius(std::span<const Point2> a, std::span<const Point2> b) {
  return tol::kDuplicate * detail::joint_bbox_diagonal(a.data(), static_cast<int>(a.size()), b.data(),
                                                        static_cast<int>(b.size()));
}

bool near(Point2 p, Point2 q, double radius) { return std::hypot(p.x - q.x, p.y - q.y) <= radius; }

}  // namespace

Polygon::Polygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "polygon needs at least 3 vertices, got " + std::to_string(vertices_.size()));
  }
  require_finite(vertices_);
  const double radius = tol::kDuplicate * bbox_diagonal(vertices_);
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Point2 p = vertices_[i];
    const Point2 q = vertices_[(i + 1) % vertices_.size()];
    if (near(p, q, radius)) {
      throw Error(ErrorCode::kDegenerate,
                  "consecutive vertices " + std::to_string(i) + " and " +
                      std::to_string((i + 1) % vertices_.size()) + " coincide");
    }
  }
}

Polygon Polygon::from_points_merged(std::span<const Point2> points) {
  require_finite(points);
  const double radius = tol::kDuplicate * bbox_diagonal(points);
  std::vector<Point2> kept;
  kept.reserve(points.size());
  for (const Point2& p : points) {
    if (kept.empty() || !near(kept.back(), p, radius)) kept.push_back(p);
  }
  while (kept.size() > 1 && near(kept.back(), kept.front(), radius)) kept.pop_back();
  if (kept.size() < 3) {
    throw Error(ErrorCode::kDegenerate, "fewer than 3 distinct vertices after merging duplicates");
  }
  return Polygon(std::move(kept));
}

Point2 centroid(std::span<const Point2> points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "centroid of an empty point set");
  Point2 c;
  for (const Point2& p : points) {
    c.x += p.x;
    c.y += p.y;
  }
  const double n = static_cast<double>(points.size());
  return {c.x / n, c.y / n};
}

Point2 centroid(const Polygon& poly) { return centroid(poly.vertices()); }

double bbox_diagonal(std::span<const Point2> points) {
  return detail::bbox_diagonal(points.data(), static_cast<int>(points.size()));
}

bool is_collinear(std::span<const Point2> points) {
  return detail::all_collinear(points.data(), static_cast<int>(points.size()));
}

bool is_convex(std::span<const Point2> points) {
  const std::size_t n = points.size();
  if (n < 3 || is_collinear(points)) return false;
  const double scale = bbox_diagonal(points);
  const double limit = tol::kParallel * scale * scale;
  bool left = false;
  bool right = false;
  double winding = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e1 = points[(i + 1) % n] - points[i];
    const Point2 e2 = points[(i + 2) % n] - points[(i + 1) % n];
    const double turn = cross(e1, e2);
    if (turn > limit) left = true;
    if (turn < -limit) right = true;
    winding += std::atan2(turn, dot(e1, e2));
  }
  if (left && right) return false;
  // A star polygon turns consistently but winds more than once.
  return std::abs(std::abs(winding) - 2.0 * std::numbers::pi) < 1e-6;
}

std::vector<std::size_t> clockwise_permutation(std::span<const Point2> points) {
  const int n = static_cast<int>(points.size());
  if (n == 0) return {};
  std::vector<int> order(n);
  std::vector<double> angle(n), dist(n);
  detail::clockwise_order(points.data(), n, order.data(), angle.data(), dist.data());
  return {order.begin(), order.end()};
}

Polygon order_clockwise(const Polygon& poly) {
  if (is_collinear(poly.vertices())) {
    throw Error(ErrorCode::kDegenerate, "cannot order a polygon whose vertices are all collinear");
  }
  std::vector<Point2> out;
  out.reserve(poly.size());
  for (std::size_t i : clockwise_permutation(poly.vertices())) out.push_back(poly[i]);
  return Polygon(std::move(out));
}

std::optional<Point2> segment_intersection(Point2 p1, Point2 p2, Point2 p3, Point2 p4) {
  if (!finite(p1) || !finite(p2) || !finite(p3) || !finite(p4)) {
    throw Error(ErrorCode::kNonFinite, "segment endpoint is not finite");
  }
  const detail::SegmentHit hit = detail::intersect_segments(p1, p2, p3, p4);
  if (!hit.hit) return std::nullopt;
  return hit.point;
}

double point_side(Point2 pt, Point2 a, Point2 b) {
  if (!finite(pt) || !finite(a) || !finite(b)) {
    throw Error(ErrorCode::kNonFinite, "point_side argument is not finite");
  }
  const double magnitude = std::max({std::abs(a.x), std::abs(a.y), std::abs(b.x), std::abs(b.y)});
  if (std::hypot(b.x - a.x, b.y - a.y) <= tol::kDuplicate * magnitude || a == b) {
    throw Error(ErrorCode::kDegenerate, "edge endpoints coincide");
  }
  return detail::side_of(pt, a, b);
}

std::vector<Point2> points_inside(const Polygon& candidates, const Polygon& container, Convexity mode) {
  if (mode == Convexity::kStrict && !is_convex(container.vertices())) {
    throw Error(ErrorCode::kNonConvex, "container polygon is not convex");
  }
  const auto pts = candidates.vertices();
  const auto box = container.vertices();
  const double scale = detail::joint_bbox_diagonal(pts.data(), static_cast<int>(pts.size()),
                                                   box.data(), static_cast<int>(box.size()));
  std::vector<Point2> out;
  for (const Point2& p : pts) {
    if (detail::inside_same_side(p, box.data(), static_cast<int>(box.size()), scale)) out.push_back(p);
  }
  return out;
}

std::vector<Point2> IntersectionSet::coordinates() const {
  std::vector<Point2> out;
  out.reserve(points.size());
  for (const IntersectionPoint& p : points) out.push_back(p.point);
  return out;
}

IntersectionSet intersection_vertices(const Polygon& a, const Polygon& b) {
  const auto va = a.vertices();
  const auto vb = b.vertices();
  const int na = static_cast<int>(va.size());
  const int nb = static_cast<int>(vb.size());
  const double scale = detail::joint_bbox_diagonal(va.data(), na, vb.data(), nb);
  const double radius = merge_radius(va, vb);

  // Interior vertices take precedence over edge-edge hits at the same spot:
  // a vertex is an exact input coordinate.
  std::vector<IntersectionPoint> interior;
  auto taken = [&](const std::vector<IntersectionPoint>& pool, Point2 p) {
    return std::any_of(pool.begin(), pool.end(),
                       [&](const IntersectionPoint& q) { return near(q.point, p, radius); });
  };
  for (int i = 0; i < na; ++i) {
    if (detail::inside_same_side(va[i], vb.data(), nb, scale) && !taken(interior, va[i])) {
      interior.push_back({va[i], Provenance::kAInsideB, i, -1});
    }
  }
  for (int j = 0; j < nb; ++j) {
    if (detail::inside_same_side(vb[j], va.data(), na, scale) && !taken(interior, vb[j])) {
      interior.push_back({vb[j], Provenance::kBInsideA, -1, j});
    }
  }

  IntersectionSet out;
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      const detail::SegmentHit hit =
          detail::intersect_segments(va[i], va[(i + 1) % na], vb[j], vb[(j + 1) % nb]);
      if (hit.hit && !taken(out.points, hit.point) && !taken(interior, hit.point)) {
        out.points.push_back({hit.point, Provenance::kEdgeEdge, i, j});
      }
    }
  }
  out.points.insert(out.points.end(), interior.begin(), interior.end());
  return out;
}

double shoelace_area(std::span<const Point2> points) {
  return std::abs(detail::signed_area(points.data(), static_cast<int>(points.size())));
}

double shoelace_area(const Polygon& poly) { return shoelace_area(poly.vertices()); }

PairResult piou_pair(const Polygon& a, const Polygon& b, Convexity mode) {
  PairResult out;
  if (is_collinear(a.vertices()) || is_collinear(b.vertices())) {
    out.degenerate = true;
    return out;
  }
  const Polygon oa = order_clockwise(a);
  const Polygon ob = order_clockwise(b);
  if (mode == Convexity::kStrict && (!is_convex(oa.vertices()) || !is_convex(ob.vertices()))) {
    throw Error(ErrorCode::kNonConvex, "piou_pair requires convex polygons");
  }
  out.area_a = shoelace_area(oa);
  out.area_b = shoelace_area(ob);

  const std::vector<Point2> overlap = intersection_vertices(oa, ob).coordinates();
  if (overlap.size() >= 3 && !is_collinear(overlap)) {
    std::vector<Point2> ordered;
    ordered.reserve(overlap.size());
    for (std::size_t i : clockwise_permutation(overlap)) ordered.push_back(overlap[i]);
    out.area_i = shoelace_area(ordered);
  }
  const double union_area = out.area_a + out.area_b - out.area_i;
  if (union_area <= 0.0) {
    out.degenerate = true;
    return out;
  }
  out.iou = std::clamp(out.area_i / union_area, 0.0, 1.0);
  return out;
}

}  // namespace piou
