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

// Fixed-buffer primitives shared by the scalar and batched IoU paths. All
// routines take raw counts and caller-owned scratch so the batched kernel can
// run without heap allocation.

#ifndef PIOU_SRC_KERNELS_HPP_
#define PIOU_SRC_KERNELS_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>

#include "piou/geometry.hpp"

namespace piou::detail {

inline double length(double dx, double dy) { return std::sqrt(dx * dx + dy * dy); }

inline double bbox_diagonal(const Point2* pts, int n) {
  if (n <= 0) return 0.0;
  double lo_x = pts[0].x, hi_x = pts[0].x, lo_y = pts[0].y, hi_y = pts[0].y;
  for (int i = 1; i < n; ++i) {
    lo_x = std::min(lo_x, pts[i].x);
    hi_x = std::max(hi_x, pts[i].x);
    lo_y = std::min(lo_y, pts[i].y);
    hi_y = std::max(hi_y, pts[i].y);
  }
  return length(hi_x - lo_x, hi_y - lo_y);
}

inline double joint_bbox_diagonal(const Point2* a, int na, const Point2* b, int nb) {
  double lo_x = a[0].x, hi_x = a[0].x, lo_y = a[0].y, hi_y = a[0].y;
  auto grow = [&](const Point2* p, int n) {
    for (int i = 0; i < n; ++i) {
      lo_x = std::min(lo_x, p[i].x);
      hi_x = std::max(hi_x, p[i].x);
      lo_y = std::min(lo_y, p[i].y);
      hi_y = std::max(hi_y, p[i].y);
    }
  };
  grow(a, na);
  grow(b, nb);
  return length(hi_x - lo_x, hi_y - lo_y);
}

inline bool all_collinear(const Point2* pts, int n) {
  const double scale = bbox_diagonal(pts, n);
  if (n < 3 || scale == 0.0) return true;
  // Anchor on the point farthest from pts[0] so the reference direction is
  // well conditioned.
  int far = 0;
  double far_d = -1.0;
  for (int i = 1; i < n; ++i) {
    const Point2 d = pts[i] - pts[0];
    const double d2 = dot(d, d);
    if (d2 > far_d) {
      far_d = d2;
      far = i;
    }
  }
  const Point2 dir = pts[far] - pts[0];
  const double limit = tol::kParallel * scale * scale;
  for (int i = 1; i < n; ++i) {
    if (std::abs(cross(dir, pts[i] - pts[0])) > limit) return false;
  }
  return true;
}

/// Signed shoelace area; negative for clockwise order (y axis up).
inline double signed_area(const Point2* pts, int n) {
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point2 p = pts[i];
    const Point2 q = pts[i + 1 == n ? 0 : i + 1];
    acc += p.x * q.y - p.y * q.x;
  }
  return 0.5 * acc;
}

inline double signed_area(const Point2* pts, const int* order, int n) {
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point2 p = pts[order[i]];
    const Point2 q = pts[order[i + 1 == n ? 0 : i + 1]];
    acc += p.x * q.y - p.y * q.x;
  }
  return 0.5 * acc;
}

struct SegmentHit {
  Point2 point;
  bool hit = false;
  bool parallel = false;
  // Parallel and lying on a common line with overlapping extents.
  bool coincident = false;
};

inline bool within(double v, double e1, double e2, double slack) {
  const double lo = std::min(e1, e2);
  const double hi = std::max(e1, e2);
  return v >= lo - slack && v <= hi + slack;
}

inline SegmentHit intersect_segments(Point2 p1, Point2 p2, Point2 p3, Point2 p4) {
  SegmentHit out;
  const Point2 e1 = p2 - p1;
  const Point2 e2 = p4 - p3;
  const double len = std::sqrt(std::max(dot(e1, e1), dot(e2, e2)));
  if (len == 0.0) return out;
  const double slack = tol::kRange * len;
  const double d = (p1.x - p2.x) * (p3.y - p4.y) - (p1.y - p2.y) * (p3.x - p4.x);
  if (std::abs(d) < tol::kParallel * len * len) {
    out.parallel = true;
    const Point2 dir = p2 - p1;
    const double dir_len = length(dir.x, dir.y);
    if (dir_len > 0.0 && std::abs(cross(dir, p3 - p1)) <= slack * dir_len &&
        std::abs(cross(dir, p4 - p1)) <= slack * dir_len) {
      const double t3 = dot(p3 - p1, dir);
      const double t4 = dot(p4 - p1, dir);
      const double tol_t = slack * dir_len;
      out.coincident = std::max(t3, t4) >= -tol_t && std::min(t3, t4) <= dir_len * dir_len + tol_t;
    }
    return out;
  }
  const double a = p1.x * p2.y - p1.y * p2.x;
  const double b = p3.x * p4.y - p3.y * p4.x;
  const Point2 ip{(a * (p3.x - p4.x) - b * (p1.x - p2.x)) / d,
                  (a * (p3.y - p4.y) - b * (p1.y - p2.y)) / d};
  if (within(ip.x, p1.x, p2.x, slack) && within(ip.x, p3.x, p4.x, slack) &&
      within(ip.y, p1.y, p2.y, slack) && within(ip.y, p3.y, p4.y, slack)) {
    out.point = ip;
    out.hit = true;
  }
  return out;
}

inline double side_of(Point2 pt, Point2 a, Point2 b) {
  return (pt.y - a.y) * (b.x - a.x) - (pt.x - a.x) * (b.y - a.y);
}

/// Same side of every edge, boundary inclusive with kRange * scale slack
/// measured as a distance from the edge line.
inline bool inside_same_side(Point2 pt, const Point2* poly, int n, double scale) {
  bool any_left = false;
  bool any_right = false;
  for (int i = 0; i < n; ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[i + 1 == n ? 0 : i + 1];
    const double s = side_of(pt, a, b);
    const double band = tol::kRange * scale * length(b.x - a.x, b.y - a.y);
    if (s > band) {
      any_left = true;
    } else if (s < -band) {
      any_right = true;
    }
    if (any_left && any_right) return false;
  }
  return true;
}

/// Writes into `order` the indices of pts sorted clockwise about their mean,
/// starting at pts[0]. `angle` and `dist` are scratch of length n.
inline void clockwise_order(const Point2* pts, int n, int* order, double* angle, double* dist) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  Point2 c{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    c.x += pts[i].x;
    c.y += pts[i].y;
  }
  c.x /= n;
  c.y /= n;
  const double ref = std::atan2(pts[0].y - c.y, pts[0].x - c.x);
  for (int i = 0; i < n; ++i) {
    const double dx = pts[i].x - c.x;
    const double dy = pts[i].y - c.y;
    double rel = ref - std::atan2(dy, dx);
    if (rel < 0.0) rel += kTwoPi;
    if (rel >= kTwoPi - tol::kAngleTie) rel = 0.0;
    angle[i] = i == 0 ? 0.0 : rel;
    dist[i] = dx * dx + dy * dy;
    order[i] = i;
  }
  auto before = [&](int i, int j) {
    if (std::abs(angle[i] - angle[j]) > tol::kAngleTie) return angle[i] < angle[j];
    if (dist[i] != dist[j]) return dist[i] < dist[j];
    return i < j;
  };
  // n is at most a few dozen; insertion sort keeps this allocation-free.
  for (int k = 1; k < n; ++k) {
    const int v = order[k];
    int m = k;
    while (m > 0 && before(v, order[m - 1])) {
      order[m] = order[m - 1];
      --m;
    }
    order[m] = v;
  }
}

}  // namespace piou::detail

#endif  // PIOU_SRC_KERNELS_HPP_
