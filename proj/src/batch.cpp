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

#include "piou/batch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <thread>

#include "kernels.hpp"
#include "piou/error.hpp"

namespace piou {
namespace {

constexpr int kMaxP = static_cast<int>(kMaxSides);
constexpr int kMaxOverlap = 4 * kMaxP;
constexpr int kMaxKept = 2 * kMaxP;

enum class SlotKind : std::uint8_t { kEmpty, kEdge, kVertexA, kVertexB };

struct Slot {
  Point2 p;
  SlotKind kind = SlotKind::kEmpty;
  // Ordered index into the row's A (vertex, or edge start) and B.
  std::int16_t i = -1;
  std::int16_t j = -1;
};

// Everything one row of the forward pass produces. Lives on the stack.
struct RowState {
  int width = 0;  // P
  int na = 0;
  int nb = 0;
  std::array<Point2, kMaxP> a;  // clockwise
  std::array<Point2, kMaxP> b;
  std::array<int, kMaxP> src_a;  // storage slot of each ordered vertex
  std::array<int, kMaxP> src_b;

  // [ C : 2P | A inside B : P | B inside A : P ]
  std::array<Slot, kMaxOverlap> overlap;
  std::array<bool, kMaxOverlap> valid;
  int distinct = 0;

  std::array<Slot, kMaxKept> kept;
  std::array<int, kMaxKept> kept_order;
  int kept_count = 0;

  double signed_a = 0.0;
  double signed_b = 0.0;
  double signed_i = 0.0;
  double value = 0.0;
  bool degenerate = false;
  bool has_overlap = false;
  // Every overlap vertex is an A vertex merged with a B vertex: the polygons
  // coincide and PIoU sits at its maximum.
  bool coincide = false;

  // Ordering scratch.
  std::array<int, kMaxOverlap> order;
  std::array<double, kMaxOverlap> angle;
  std::array<double, kMaxOverlap> dist;
};

bool near(Point2 p, Point2 q, double radius) {
  const Point2 d = p - q;
  return dot(d, d) <= radius * radius;
}

void load_polygon(const double* xy, const std::uint8_t* mask, int width, RowState& s,
                  std::array<Point2, kMaxP>& out, std::array<int, kMaxP>& src, int& n) {
  std::array<Point2, kMaxP> raw;
  std::array<int, kMaxP> slot;
  n = 0;
  for (int k = 0; k < width; ++k) {
    if (!mask[k]) continue;
    raw[n] = {xy[2 * k], xy[2 * k + 1]};
    slot[n] = k;
    ++n;
  }
  detail::clockwise_order(raw.data(), n, s.order.data(), s.angle.data(), s.dist.data());
  for (int k = 0; k < n; ++k) {
    out[k] = raw[s.order[k]];
    src[k] = slot[s.order[k]];
  }
}

void forward_row(const double* xa, const std::uint8_t* ma, const double* xb, const std::uint8_t* mb,
                 int width, bool faithful, RowState& s) {
  s.width = width;
  s.value = 0.0;
  s.signed_a = s.signed_b = s.signed_i = 0.0;
  s.degenerate = false;
  s.has_overlap = false;
  s.coincide = false;
  s.distinct = 0;
  s.kept_count = 0;
  const int c_width = 2 * width;
  const int total = 4 * width;
  for (int k = 0; k < total; ++k) {
    s.overlap[k] = Slot{};
    s.valid[k] = false;
  }

  load_polygon(xa, ma, width, s, s.a, s.src_a, s.na);
  load_polygon(xb, mb, width, s, s.b, s.src_b, s.nb);
  if (detail::all_collinear(s.a.data(), s.na) || detail::all_collinear(s.b.data(), s.nb)) {
    s.degenerate = true;
    return;
  }
  s.signed_a = detail::signed_area(s.a.data(), s.na);
  s.signed_b = detail::signed_area(s.b.data(), s.nb);

  const double scale = detail::joint_bbox_diagonal(s.a.data(), s.na, s.b.data(), s.nb);
  const double radius = tol::kDuplicate * scale;

  // Edge-edge intersections.
  int nc = 0;
  for (int i = 0; i < s.na; ++i) {
    const Point2 p1 = s.a[i];
    const Point2 p2 = s.a[i + 1 == s.na ? 0 : i + 1];
    for (int j = 0; j < s.nb; ++j) {
      const detail::SegmentHit hit = detail::intersect_segments(p1, p2, s.b[j], s.b[j + 1 == s.nb ? 0 : j + 1]);
      if (hit.coincident) s.degenerate = true;
      if (!hit.hit || nc == c_width) continue;
      if (!faithful) {
        bool dup = false;
        for (int k = 0; k < nc && !dup; ++k) dup = near(s.overlap[k].p, hit.point, radius);
        if (dup) continue;
      }
      s.overlap[nc] = {hit.point, SlotKind::kEdge, static_cast<std::int16_t>(i), static_cast<std::int16_t>(j)};
      s.valid[nc] = true;
      ++nc;
    }
  }
  // Mutual interior points.
  for (int k = 0; k < s.na; ++k) {
    if (detail::inside_same_side(s.a[k], s.b.data(), s.nb, scale)) {
      s.overlap[c_width + k] = {s.a[k], SlotKind::kVertexA, static_cast<std::int16_t>(k), -1};
      s.valid[c_width + k] = true;
    }
  }
  for (int k = 0; k < s.nb; ++k) {
    if (detail::inside_same_side(s.b[k], s.a.data(), s.na, scale)) {
      s.overlap[3 * width + k] = {s.b[k], SlotKind::kVertexB, -1, static_cast<std::int16_t>(k)};
      s.valid[3 * width + k] = true;
    }
  }

  const int keep = c_width;
  if (!faithful) {
    // Merge near-duplicates; vertices win over edge-edge hits. A B vertex
    // merged into an A vertex is remembered in that slot's j so the backward
    // pass can share the adjoint between the two.
    for (int k = c_width; k < total; ++k) {
      if (!s.valid[k]) continue;
      for (int q = c_width; q < k; ++q) {
        if (s.valid[q] && near(s.overlap[q].p, s.overlap[k].p, radius)) {
          s.valid[k] = false;
          Slot& winner = s.overlap[q];
          if (winner.kind == SlotKind::kVertexA && s.overlap[k].kind == SlotKind::kVertexB && winner.j < 0) {
            winner.j = s.overlap[k].j;
          }
          break;
        }
      }
    }
    for (int k = 0; k < c_width; ++k) {
      if (!s.valid[k]) continue;
      for (int q = c_width; q < total; ++q) {
        if (s.valid[q] && near(s.overlap[q].p, s.overlap[k].p, radius)) {
          s.valid[k] = false;
          break;
        }
      }
    }
    int n = 0;
    int shared = 0;
    for (int k = 0; k < total; ++k) {
      if (!s.valid[k]) continue;
      ++s.distinct;
      if (s.overlap[k].kind == SlotKind::kVertexA && s.overlap[k].j >= 0) ++shared;
      if (n < keep) s.kept[n++] = s.overlap[k];
    }
    s.coincide = shared == s.distinct && s.distinct == s.na && s.na == s.nb;
    if (n < 3) {
      s.kept_count = n;
      return;
    }
    const Slot placeholder = s.kept[n - 1];
    for (int k = n; k < keep; ++k) s.kept[k] = placeholder;
  } else {
    for (int k = 0; k < total; ++k) s.distinct += s.valid[k] ? 1 : 0;
    // Stable sort by decreasing distance from the origin; (0,0) fills sink.
    std::array<int, kMaxOverlap> idx;
    std::array<double, kMaxOverlap> r;
    for (int k = 0; k < total; ++k) {
      idx[k] = k;
      r[k] = dot(s.overlap[k].p, s.overlap[k].p);
    }
    for (int k = 1; k < total; ++k) {
      const int v = idx[k];
      int m = k;
      while (m > 0 && r[idx[m - 1]] < r[v]) {
        idx[m] = idx[m - 1];
        --m;
      }
      idx[m] = v;
    }
    const Slot placeholder = s.overlap[idx[0]];
    for (int k = 0; k < keep; ++k) {
      const Slot& slot = s.overlap[idx[k]];
      s.kept[k] = (slot.p.x == 0.0 && slot.p.y == 0.0) ? placeholder : slot;
    }
    if (placeholder.kind == SlotKind::kEmpty) {
      s.kept_count = 0;
      return;
    }
  }
  s.kept_count = keep;

  std::array<Point2, kMaxKept> pts;
  for (int k = 0; k < keep; ++k) pts[k] = s.kept[k].p;
  if (detail::all_collinear(pts.data(), keep)) return;
  detail::clockwise_order(pts.data(), keep, s.kept_order.data(), s.angle.data(), s.dist.data());
  s.signed_i = detail::signed_area(pts.data(), s.kept_order.data(), keep);

  const double area_i = std::abs(s.signed_i);
  const double union_area = std::abs(s.signed_a) + std::abs(s.signed_b) - area_i;
  if (!(union_area > 0.0)) {
    s.degenerate = true;
    s.signed_i = 0.0;
    return;
  }
  s.has_overlap = true;
  s.value = std::clamp(area_i / union_area, 0.0, 1.0);
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Reverse pass through the line-line determinant formula: adds the adjoint
// of (Ix, Iy) onto the four endpoints.
void intersection_adjoint(Point2 p1, Point2 p2, Point2 p3, Point2 p4, double gx, double gy,
                          std::array<Point2, 4>& out) {
  const double a = p1.x * p2.y - p1.y * p2.x;
  const double b = p3.x * p4.y - p3.y * p4.x;
  const double dx12 = p1.x - p2.x;
  const double dy12 = p1.y - p2.y;
  const double dx34 = p3.x - p4.x;
  const double dy34 = p3.y - p4.y;
  const double d = dx12 * dy34 - dy12 * dx34;
  const double ix = (a * dx34 - b * dx12) / d;
  const double iy = (a * dy34 - b * dy12) / d;

  const double nx = gx / d;
  const double ny = gy / d;
  const double dd = -(gx * ix + gy * iy) / d;

  const double ga = nx * dx34 + ny * dy34;
  const double gb = -(nx * dx12 + ny * dy12);
  const double gdx12 = -nx * b + dd * dy34;
  const double gdy12 = -ny * b - dd * dx34;
  const double gdx34 = nx * a - dd * dy12;
  const double gdy34 = ny * a + dd * dx12;

  out[0] = {ga * p2.y + gdx12, -ga * p2.x + gdy12};
  out[1] = {-ga * p1.y - gdx12, ga * p1.x - gdy12};
  out[2] = {gb * p4.y + gdx34, -gb * p4.x + gdy34};
  out[3] = {-gb * p3.y - gdx34, gb * p3.x - gdy34};
}

void add(double* grad, int slot, double gx, double gy) {
  grad[2 * slot] += gx;
  grad[2 * slot + 1] += gy;
}

// Gradient of a signed shoelace sum over `pts` (already in the order used)
// scaled by `w`, routed to storage slots.
void polygon_area_adjoint(const std::array<Point2, kMaxP>& pts, const std::array<int, kMaxP>& src, int n,
                          double w, double* grad) {
  for (int k = 0; k < n; ++k) {
    const Point2 prev = pts[k == 0 ? n - 1 : k - 1];
    const Point2 next = pts[k + 1 == n ? 0 : k + 1];
    add(grad, src[k], 0.5 * w * (next.y - prev.y), 0.5 * w * (prev.x - next.x));
  }
}

void backward_row(const RowState& s, double* da, double* db) {
  // Coinciding polygons sit at the maximum, where zero is a subgradient.
  if (!s.has_overlap || s.coincide) return;
  const double area_a = std::abs(s.signed_a);
  const double area_b = std::abs(s.signed_b);
  const double area_i = std::abs(s.signed_i);
  const double u = area_a + area_b - area_i;
  const double g_i = (area_a + area_b) / (u * u);
  const double g_ab = -area_i / (u * u);

  polygon_area_adjoint(s.a, s.src_a, s.na, g_ab * sign_of(s.signed_a), da);
  polygon_area_adjoint(s.b, s.src_b, s.nb, g_ab * sign_of(s.signed_b), db);

  const double w = g_i * sign_of(s.signed_i);
  const int m = s.kept_count;
  for (int t = 0; t < m; ++t) {
    const Slot& cur = s.kept[s.kept_order[t]];
    const Point2 prev = s.kept[s.kept_order[t == 0 ? m - 1 : t - 1]].p;
    const Point2 next = s.kept[s.kept_order[t + 1 == m ? 0 : t + 1]].p;
    const double gx = 0.5 * w * (next.y - prev.y);
    const double gy = 0.5 * w * (prev.x - next.x);
    switch (cur.kind) {
      case SlotKind::kVertexA:
        if (cur.j >= 0) {
          add(da, s.src_a[cur.i], 0.5 * gx, 0.5 * gy);
          add(db, s.src_b[cur.j], 0.5 * gx, 0.5 * gy);
        } else {
          add(da, s.src_a[cur.i], gx, gy);
        }
        break;
      case SlotKind::kVertexB:
        add(db, s.src_b[cur.j], gx, gy);
        break;
      case SlotKind::kEdge: {
        const int i2 = cur.i + 1 == s.na ? 0 : cur.i + 1;
        const int j2 = cur.j + 1 == s.nb ? 0 : cur.j + 1;
        std::array<Point2, 4> g;
        intersection_adjoint(s.a[cur.i], s.a[i2], s.b[cur.j], s.b[j2], gx, gy, g);
        add(da, s.src_a[cur.i], g[0].x, g[0].y);
        add(da, s.src_a[i2], g[1].x, g[1].y);
        add(db, s.src_b[cur.j], g[2].x, g[2].y);
        add(db, s.src_b[j2], g[3].x, g[3].y);
        break;
      }
      case SlotKind::kEmpty:
        break;
    }
  }
}

void check_pair(const PolygonBatch& a, const PolygonBatch& b) {
  if (a.batch() != b.batch() || a.sides() != b.sides()) {
    throw Error(ErrorCode::kShapeMismatch,
                "batch shapes differ: [" + std::to_string(a.batch()) + "," + std::to_string(a.sides()) +
                    ",2] vs [" + std::to_string(b.batch()) + "," + std::to_string(b.sides()) + ",2]");
  }
}

template <class Fn>
void for_rows(std::size_t rows, bool parallel, Fn&& fn) {
  const std::size_t threads =
      parallel ? std::min<std::size_t>(rows, std::max(1u, std::thread::hardware_concurrency())) : 1;
  if (threads <= 1) {
    RowState s;
    for (std::size_t r = 0; r < rows; ++r) fn(r, s);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (rows + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(rows, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      RowState s;
      for (std::size_t r = lo; r < hi; ++r) fn(r, s);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

PolygonBatch::PolygonBatch(std::size_t batch, std::size_t sides, std::vector<double> data,
                           std::vector<std::uint8_t> valid)
    : batch_(batch), sides_(sides), data_(std::move(data)), valid_(std::move(valid)) {
  if (sides_ < 3) throw Error(ErrorCode::kInvalidArgument, "polygons need at least 3 vertex slots");
  if (data_.size() != batch_ * sides_ * 2) {
    throw Error(ErrorCode::kShapeMismatch, "vertex buffer has " + std::to_string(data_.size()) +
                                               " values, expected " + std::to_string(batch_ * sides_ * 2));
  }
  if (valid_.empty()) valid_.assign(batch_ * sides_, 1);
  if (valid_.size() != batch_ * sides_) {
    throw Error(ErrorCode::kShapeMismatch, "validity mask has " + std::to_string(valid_.size()) +
                                               " entries, expected " + std::to_string(batch_ * sides_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "polygon batch has a non-finite coordinate");
  }
  for (std::size_t r = 0; r < batch_; ++r) {
    std::size_t n = 0;
    for (std::size_t k = 0; k < sides_; ++k) n += valid_[r * sides_ + k] ? 1 : 0;
    if (n < 3) {
      throw Error(ErrorCode::kInvalidArgument,
                  "row " + std::to_string(r) + " has " + std::to_string(n) + " valid vertices, need 3");
    }
  }
}

PolygonBatch PolygonBatch::from_polygons(std::span<const Polygon> polygons) {
  if (polygons.empty()) throw Error(ErrorCode::kInvalidArgument, "no polygons");
  const std::size_t sides = polygons.front().size();
  std::vector<double> data;
  data.reserve(polygons.size() * sides * 2);
  for (const Polygon& p : polygons) {
    if (p.size() != sides) throw Error(ErrorCode::kShapeMismatch, "polygons differ in vertex count");
    for (const Point2& v : p.vertices()) {
      data.push_back(v.x);
      data.push_back(v.y);
    }
  }
  return PolygonBatch(polygons.size(), sides, std::move(data));
}

std::vector<Point2> PolygonBatch::row_points(std::size_t b) const {
  std::vector<Point2> out;
  for (std::size_t k = 0; k < sides_; ++k) {
    if (valid_[b * sides_ + k]) out.push_back(vertex(b, k));
  }
  return out;
}

namespace {

void check_width(const PolygonBatch& a) {
  if (a.sides() > kMaxSides) {
    throw Error(ErrorCode::kInvalidArgument,
                "at most " + std::to_string(kMaxSides) + " vertices per polygon are supported");
  }
}

}  // namespace

std::vector<double> piou_batch(const PolygonBatch& a, const PolygonBatch& b, const KernelOptions& options) {
  check_pair(a, b);
  check_width(a);
  std::vector<double> out(a.batch());
  const int width = static_cast<int>(a.sides());
  for_rows(a.batch(), options.parallel, [&](std::size_t r, RowState& s) {
    forward_row(a.row(r), a.row_valid(r), b.row(r), b.row_valid(r), width, options.paper_faithful, s);
    out[r] = s.value;
  });
  return out;
}

OverlapBuffer overlap_buffer(const PolygonBatch& a, const PolygonBatch& b, const KernelOptions& options) {
  check_pair(a, b);
  check_width(a);
  const std::size_t width = a.sides();
  OverlapBuffer out;
  out.batch = a.batch();
  out.sides = width;
  out.points.resize(a.batch() * 4 * width);
  out.valid.resize(a.batch() * 4 * width);
  out.kept.resize(a.batch() * 2 * width);
  out.count.resize(a.batch());
  for (std::size_t r = 0; r < a.batch(); ++r) {
    RowState s;
    forward_row(a.row(r), a.row_valid(r), b.row(r), b.row_valid(r), static_cast<int>(width),
                options.paper_faithful, s);
    for (std::size_t k = 0; k < 4 * width; ++k) {
      out.points[r * 4 * width + k] = s.overlap[k].p;
      out.valid[r * 4 * width + k] = s.valid[k] ? 1 : 0;
    }
    out.count[r] = static_cast<std::size_t>(s.distinct);
    const bool ordered = s.has_overlap;
    for (int k = 0; k < s.kept_count; ++k) {
      out.kept[r * 2 * width + k] = s.kept[ordered ? s.kept_order[k] : k].p;
    }
  }
  return out;
}

IoUGradients piou_backward(const PolygonBatch& a, const PolygonBatch& b, const KernelOptions& options) {
  check_pair(a, b);
  check_width(a);
  const std::size_t stride = a.sides() * 2;
  IoUGradients out;
  out.value.resize(a.batch());
  out.d_a.assign(a.batch() * stride, 0.0);
  out.d_b.assign(a.batch() * stride, 0.0);
  out.degenerate.assign(a.batch(), 0);
  const int width = static_cast<int>(a.sides());
  for_rows(a.batch(), options.parallel, [&](std::size_t r, RowState& s) {
    forward_row(a.row(r), a.row_valid(r), b.row(r), b.row_valid(r), width, options.paper_faithful, s);
    out.value[r] = s.value;
    out.degenerate[r] = s.degenerate ? 1 : 0;
    backward_row(s, out.d_a.data() + r * stride, out.d_b.data() + r * stride);
  });
  return out;
}

LossGradients piou_loss(const PolygonBatch& a, const PolygonBatch& b, const KernelOptions& options) {
  LossGradients out;
  out.grads = piou_backward(a, b, options);
  out.loss.resize(out.grads.value.size());
  for (std::size_t r = 0; r < out.loss.size(); ++r) out.loss[r] = 1.0 - out.grads.value[r];
  for (double& g : out.grads.d_a) g = -g;
  for (double& g : out.grads.d_b) g = -g;
  return out;
}

IoUGradients finite_diff_grad(const PolygonBatch& a, const PolygonBatch& b, double h,
                              const KernelOptions& options) {
  check_pair(a, b);
  check_width(a);
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "finite-difference step must be positive");
  const std::size_t stride = a.sides() * 2;
  const int width = static_cast<int>(a.sides());
  IoUGradients out;
  out.value.resize(a.batch());
  out.d_a.assign(a.batch() * stride, 0.0);
  out.d_b.assign(a.batch() * stride, 0.0);
  out.degenerate.assign(a.batch(), 0);
  for_rows(a.batch(), options.parallel, [&](std::size_t r, RowState& s) {
    std::array<double, 2 * kMaxP> xa;
    std::array<double, 2 * kMaxP> xb;
    std::copy_n(a.row(r), stride, xa.begin());
    std::copy_n(b.row(r), stride, xb.begin());
    auto eval = [&] {
      forward_row(xa.data(), a.row_valid(r), xb.data(), b.row_valid(r), width, options.paper_faithful, s);
      return s.value;
    };
    out.value[r] = eval();
    out.degenerate[r] = s.degenerate ? 1 : 0;
    auto sweep = [&](std::array<double, 2 * kMaxP>& x, const std::uint8_t* mask, double* grad) {
      for (std::size_t c = 0; c < stride; ++c) {
        if (!mask[c / 2]) continue;
        const double keep = x[c];
        x[c] = keep + h;
        const double up = eval();
        x[c] = keep - h;
        const double down = eval();
        x[c] = keep;
        grad[c] = (up - down) / (2.0 * h);
      }
    };
    sweep(xa, a.row_valid(r), out.d_a.data() + r * stride);
    sweep(xb, b.row_valid(r), out.d_b.data() + r * stride);
  });
  return out;
}

}  // namespace piou
