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

#include "piou/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "piou/error.hpp"
#include "piou/sim.hpp"

namespace piou {
namespace {

double segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Point2 q = a + t * ab;
  return std::hypot(p.x - q.x, p.y - q.y);
}

double boundary_distance(Point2 p, std::span<const Point2> poly) {
  double best = INFINITY;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  }
  return best;
}

PolygonBatch single(const Polygon& p) { return PolygonBatch::from_polygons(std::span<const Polygon>(&p, 1)); }

}  // namespace

std::string conditioning_problem(const Polygon& a, const Polygon& b, double margin) {
  if (a.size() != b.size()) return "vertex counts differ";
  if (is_collinear(a.vertices()) || is_collinear(b.vertices())) return "zero-area polygon";
  const Polygon oa = order_clockwise(a);
  const Polygon ob = order_clockwise(b);
  const auto va = oa.vertices();
  const auto vb = ob.vertices();
  const double scale = detail::joint_bbox_diagonal(va.data(), static_cast<int>(va.size()), vb.data(),
                                                   static_cast<int>(vb.size()));
  for (const Point2& p : va) {
    if (boundary_distance(p, vb) <= margin * scale) return "vertex of A near boundary of B";
  }
  for (const Point2& p : vb) {
    if (boundary_distance(p, va) <= margin * scale) return "vertex of B near boundary of A";
  }
  for (std::size_t i = 0; i < va.size(); ++i) {
    const Point2 p1 = va[i];
    const Point2 p2 = va[(i + 1) % va.size()];
    for (std::size_t j = 0; j < vb.size(); ++j) {
      const Point2 p3 = vb[j];
      const Point2 p4 = vb[(j + 1) % vb.size()];
      const double len = std::max(std::hypot(p2.x - p1.x, p2.y - p1.y), std::hypot(p4.x - p3.x, p4.y - p3.y));
      const double d = (p1.x - p2.x) * (p3.y - p4.y) - (p1.y - p2.y) * (p3.x - p4.x);
      if (std::abs(d) <= 10.0 * tol::kParallel * len * len) return "near-parallel edge pair";
    }
  }
  if (piou_pair(oa, ob).iou <= 0.0) return "no overlap";
  return {};
}

double gradient_rel_error(const IoUGradients& analytic, const IoUGradients& numeric) {
  if (analytic.d_a.size() != numeric.d_a.size() || analytic.d_b.size() != numeric.d_b.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient shapes differ");
  }
  double diff = 0.0;
  double mag = 0.0;
  auto scan = [&](const std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      diff = std::max(diff, std::abs(x[k] - y[k]));
      mag = std::max({mag, std::abs(x[k]), std::abs(y[k])});
    }
  };
  scan(analytic.d_a, numeric.d_a);
  scan(analytic.d_b, numeric.d_b);
  return mag > 0.0 ? diff / mag : diff;
}

SampleCheck check_pair(const Polygon& a, const Polygon& b, const GradcheckConfig& cfg) {
  SampleCheck out;
  out.skip_reason = conditioning_problem(a, b, cfg.margin);
  if (!out.skip_reason.empty()) return out;
  const PolygonBatch ba = single(a);
  const PolygonBatch bb = single(b);
  const IoUGradients analytic = piou_backward(ba, bb, cfg.kernel);
  const IoUGradients numeric = finite_diff_grad(ba, bb, cfg.h, cfg.kernel);
  out.rel_error = gradient_rel_error(analytic, numeric);
  out.outcome = out.rel_error <= cfg.tolerance ? SampleOutcome::kPassed : SampleOutcome::kFailed;
  return out;
}

GradcheckReport run_gradcheck(const GradcheckConfig& cfg) {
  if (cfg.samples < 1) throw Error(ErrorCode::kInvalidArgument, "gradcheck needs at least one sample");
  if (!(cfg.h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "finite-difference step must be positive");
  GradcheckReport report;
  report.requested = cfg.samples;
  report.tolerance = cfg.tolerance;
  Rng rng(cfg.seed);
  const std::size_t max_draws = 100 * cfg.samples;
  for (std::size_t draw = 0; draw < max_draws && report.checked < cfg.samples; ++draw) {
    const Polygon a = gen_convex_polygon(rng, cfg.sides);
    const Polygon b = gen_convex_polygon(rng, cfg.sides);
    const SampleCheck c = check_pair(a, b, cfg);
    if (c.outcome == SampleOutcome::kSkipped) {
      ++report.skipped;
      continue;
    }
    ++report.checked;
    report.max_rel_error = std::max(report.max_rel_error, c.rel_error);
    if (c.outcome == SampleOutcome::kFailed) {
      report.failures.push_back({draw, {a.vertices().begin(), a.vertices().end()},
                                 {b.vertices().begin(), b.vertices().end()}, c.rel_error});
    }
  }
  return report;
}

}  // namespace piou
