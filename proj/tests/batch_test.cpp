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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "piou/batch.hpp"
#include "piou/error.hpp"
#include "piou/geometry.hpp"
#include "piou/gradcheck.hpp"
#include "test_util.hpp"

namespace piou {
namespace {

using testing::error_code;
using testing::square;
using testing::translated;

PolygonBatch batch_of(const std::vector<Polygon>& polys) { return PolygonBatch::from_polygons(polys); }

struct Corpus {
  PolygonBatch a;
  PolygonBatch b;
  std::vector<double> scalar;
};

Corpus make_corpus(std::size_t n, std::size_t sides, std::uint64_t seed, Point2 shift = {0, 0}) {
  std::vector<Polygon> as;
  std::vector<Polygon> bs;
  Corpus c;
  for (const auto& [a, b] : testing::convex_pairs(n, sides, seed)) {
    as.push_back(translated(a, shift));
    bs.push_back(translated(b, shift));
    c.scalar.push_back(piou_pair(as.back(), bs.back()).iou);
  }
  c.a = batch_of(as);
  c.b = batch_of(bs);
  return c;
}

double sum_component(const std::vector<double>& g, std::size_t row, std::size_t sides, int axis) {
  double s = 0.0;
  for (std::size_t i = 0; i < sides; ++i) s += g[(row * sides + i) * 2 + axis];
  return s;
}

TEST(PolygonBatch, Validation) {
  EXPECT_EQ(error_code([] { PolygonBatch(1, 2, std::vector<double>(4, 0.0)); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code([] { PolygonBatch(2, 4, std::vector<double>(8, 0.0)); }), ErrorCode::kShapeMismatch);
  std::vector<double> bad{0, 0, 1, 0, 1, NAN, 0, 1};
  EXPECT_EQ(error_code([&] { PolygonBatch(1, 4, bad); }), ErrorCode::kNonFinite);
  std::vector<double> ok{0, 0, 1, 0, 1, 1, 0, 1};
  EXPECT_EQ(error_code([&] { PolygonBatch(1, 4, ok, {1, 1, 0, 0}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code([&] { PolygonBatch(1, 4, ok, {1, 1, 1}); }), ErrorCode::kShapeMismatch);
  EXPECT_NO_THROW(PolygonBatch(1, 4, ok, {1, 1, 1, 0}));
}

TEST(PiouBatch, ShapeMismatch) {
  const PolygonBatch a = batch_of({square(0, 0), square(1, 1)});
  const PolygonBatch b = batch_of({square(0, 0)});
  EXPECT_EQ(error_code([&] { piou_batch(a, b); }), ErrorCode::kShapeMismatch);
  std::vector<double> ring;
  for (std::size_t i = 0; i <= kMaxSides; ++i) {
    const double t = 6.283185307179586 * static_cast<double>(i) / static_cast<double>(kMaxSides + 1);
    ring.push_back(std::cos(t));
    ring.push_back(std::sin(t));
  }
  const PolygonBatch wide(1, kMaxSides + 1, ring);
  EXPECT_EQ(error_code([&] { piou_batch(wide, wide); }), ErrorCode::kInvalidArgument);
}

TEST(PiouBatch, IdenticalSquaresGiveOnes) {
  std::vector<Polygon> polys;
  for (int i = 0; i < 32; ++i) polys.push_back(square(i * 0.1, -i * 0.2, 1.0 + 0.01 * i));
  const PolygonBatch a = batch_of(polys);
  for (double v : piou_batch(a, a)) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(PiouBatch, MixedDisjointAndIdentical) {
  const PolygonBatch a = batch_of({square(0, 0), square(0, 0), square(2, 2), square(0, 0)});
  const PolygonBatch b = batch_of({square(0, 0), square(5, 0), square(2, 2), square(0.5, 0.5)});
  const std::vector<double> v = piou_batch(a, b);
  EXPECT_NEAR(v[0], 1.0, 1e-12);
  EXPECT_EQ(v[1], 0.0);
  EXPECT_NEAR(v[2], 1.0, 1e-12);
  EXPECT_NEAR(v[3], 1.0 / 7.0, 1e-12);
}

TEST(PiouBatch, MatchesScalarMasked) {
  for (std::size_t sides : {3u, 4u, 8u}) {
    const Corpus c = make_corpus(2000, sides, 100 + sides);
    const std::vector<double> v = piou_batch(c.a, c.b);
    for (std::size_t r = 0; r < v.size(); ++r) EXPECT_NEAR(v[r], c.scalar[r], 1e-9) << "P=" << sides << " row " << r;
  }
}

TEST(PiouBatch, MatchesScalarPaperFaithfulOnPositiveCoordinates) {
  // Centers lie in [-1,1]^2 and radii are at most 1, so +3 keeps every
  // coordinate strictly positive.
  const Corpus c = make_corpus(2000, 4, 200, {3.0, 3.0});
  for (double x : c.a.data()) ASSERT_GT(x, 0.0);
  for (double x : c.b.data()) ASSERT_GT(x, 0.0);
  const std::vector<double> v = piou_batch(c.a, c.b, {.paper_faithful = true});
  for (std::size_t r = 0; r < v.size(); ++r) EXPECT_NEAR(v[r], c.scalar[r], 1e-9) << "row " << r;
}

TEST(PiouBatch, SentinelHazardAtOrigin) {
  // The overlap [0,0.5]^2 has a genuine corner at the origin, which the
  // (0,0) fill convention mistakes for an empty slot.
  const PolygonBatch a = batch_of({square(0, 0)});
  const PolygonBatch b = batch_of({square(-0.5, -0.5)});
  EXPECT_NEAR(piou_batch(a, b)[0], 1.0 / 7.0, 1e-12);
  EXPECT_GT(std::abs(piou_batch(a, b, {.paper_faithful = true})[0] - 1.0 / 7.0), 1e-3);
}

TEST(PiouBatch, ParallelIsBitIdentical) {
  const Corpus c = make_corpus(300, 4, 300);
  EXPECT_EQ(piou_batch(c.a, c.b), piou_batch(c.a, c.b, {.parallel = true}));
  const IoUGradients g1 = piou_backward(c.a, c.b);
  const IoUGradients g2 = piou_backward(c.a, c.b, {.parallel = true});
  EXPECT_EQ(g1.d_a, g2.d_a);
  EXPECT_EQ(g1.d_b, g2.d_b);
}

TEST(PiouBatch, MaskedVerticesAreIgnored) {
  // A quad stored in a 6-wide row with two masked slots holding junk.
  const Corpus c = make_corpus(200, 4, 400);
  const std::size_t n = c.a.batch();
  auto widen = [&](const PolygonBatch& src) {
    std::vector<double> data;
    std::vector<std::uint8_t> valid;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < 6; ++i) {
        const bool real = i != 1 && i != 4;
        const std::size_t k = i < 1 ? i : (i < 4 ? i - 1 : i - 2);
        const Point2 p = real ? src.vertex(r, k) : Point2{123.0, -77.0};
        data.push_back(p.x);
        data.push_back(p.y);
        valid.push_back(real ? 1 : 0);
      }
    }
    return PolygonBatch(n, 6, std::move(data), std::move(valid));
  };
  const PolygonBatch wa = widen(c.a);
  const PolygonBatch wb = widen(c.b);
  const std::vector<double> v = piou_batch(wa, wb);
  const IoUGradients g = piou_backward(wa, wb);
  for (std::size_t r = 0; r < n; ++r) {
    EXPECT_NEAR(v[r], c.scalar[r], 1e-9);
    for (std::size_t i : {1u, 4u}) {
      EXPECT_EQ(g.d_a[(r * 6 + i) * 2], 0.0);
      EXPECT_EQ(g.d_b[(r * 6 + i) * 2 + 1], 0.0);
    }
  }
}

TEST(OverlapBuffer, LayoutAndPaddingNeutrality) {
  const Corpus c = make_corpus(1000, 4, 500);
  const std::size_t p = 4;
  for (bool faithful : {false, true}) {
    const Corpus& corpus = faithful ? make_corpus(1000, 4, 500, {3, 3}) : c;
    const OverlapBuffer buf = overlap_buffer(corpus.a, corpus.b, {.paper_faithful = faithful});
    ASSERT_EQ(buf.points.size(), corpus.a.batch() * 4 * p);
    ASSERT_EQ(buf.kept.size(), corpus.a.batch() * 2 * p);
    for (std::size_t r = 0; r < corpus.a.batch(); ++r) {
      const Polygon a(corpus.a.row_points(r));
      const Polygon b(corpus.b.row_points(r));
      const PairResult exact = piou_pair(a, b);
      if (!faithful) {
        std::size_t valid = 0;
        for (std::size_t k = 0; k < 4 * p; ++k) valid += buf.valid[r * 4 * p + k];
        EXPECT_EQ(valid, buf.count[r]);
      }
      if (exact.area_i == 0.0 || buf.count[r] >= 2 * p) continue;
      // Padded to 2P with a repeated vertex, the kept ring has the exact area.
      const std::vector<Point2> ring(buf.kept.begin() + static_cast<std::ptrdiff_t>(r * 2 * p),
                                     buf.kept.begin() + static_cast<std::ptrdiff_t>((r + 1) * 2 * p));
      EXPECT_NEAR(shoelace_area(ring), exact.area_i, 1e-12) << "row " << r;
      if (faithful) {
        for (Point2 q : ring) EXPECT_FALSE(q.x == 0.0 && q.y == 0.0);
      }
    }
  }
}

TEST(OverlapBuffer, DistinctCountForShiftedSquares) {
  const OverlapBuffer buf = overlap_buffer(batch_of({square(0, 0)}), batch_of({square(0.5, 0.5)}));
  EXPECT_EQ(buf.count[0], 4u);
}

TEST(PiouBackward, IdenticalPairHasZeroTranslationGradient) {
  Rng rng(600);
  for (int k = 0; k < 50; ++k) {
    const PolygonBatch a = batch_of({gen_convex_polygon(rng, 5)});
    const IoUGradients g = piou_backward(a, a);
    EXPECT_NEAR(g.value[0], 1.0, 1e-12);
    EXPECT_NEAR(sum_component(g.d_a, 0, 5, 0), 0.0, 1e-12);
    EXPECT_NEAR(sum_component(g.d_a, 0, 5, 1), 0.0, 1e-12);
  }
}

TEST(PiouBackward, IdenticalPairIsStationary) {
  // Coincident vertices share their adjoint, so the maximum is a fixed point.
  const PolygonBatch a = batch_of({square(0, 0), square(1, 2, 0.5)});
  const IoUGradients g = piou_backward(a, a);
  for (double d : g.d_a) EXPECT_EQ(d, 0.0);
  for (double d : g.d_b) EXPECT_EQ(d, 0.0);
}

TEST(PiouBackward, DisjointPlateau) {
  Rng rng(700);
  std::vector<Polygon> as;
  std::vector<Polygon> bs;
  for (int k = 0; k < 200; ++k) {
    as.push_back(gen_convex_polygon(rng, 4));
    bs.push_back(translated(gen_convex_polygon(rng, 4), {6.0, rng.uniform(-3, 3)}));
  }
  const IoUGradients g = piou_backward(batch_of(as), batch_of(bs));
  for (double v : g.value) EXPECT_EQ(v, 0.0);
  for (double d : g.d_a) EXPECT_EQ(d, 0.0);
  for (double d : g.d_b) EXPECT_EQ(d, 0.0);
}

TEST(PiouBackward, SharedEdgeIsFlaggedDegenerate) {
  const IoUGradients g = piou_backward(batch_of({square(0, 0)}), batch_of({square(1, 0)}));
  EXPECT_EQ(g.value[0], 0.0);
  EXPECT_EQ(g.degenerate[0], 1);
  for (double d : g.d_a) EXPECT_TRUE(std::isfinite(d));
}

TEST(PiouLoss, Examples) {
  const PolygonBatch a = batch_of({square(0, 0), square(0, 0), square(0, 0)});
  const PolygonBatch b = batch_of({square(0, 0), square(4, 4), square(0.5, 0.5)});
  const LossGradients l = piou_loss(a, b);
  EXPECT_NEAR(l.loss[0], 0.0, 1e-12);
  EXPECT_EQ(l.loss[1], 1.0);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(l.grads.d_a[8 + i], 0.0);
  EXPECT_NEAR(l.loss[2], 6.0 / 7.0, 1e-12);
  const IoUGradients g = piou_backward(a, b);
  for (std::size_t i = 0; i < g.d_a.size(); ++i) EXPECT_EQ(l.grads.d_a[i], -g.d_a[i]);
}

TEST(PiouBackward, ShiftedSquaresAnalytic) {
  // Moving A = [0,1]^2 right by t gives I = (0.5 + t) * 0.5 and U = 2 - I,
  // so dPIoU/dt = 0.5 * (U + I) / U^2 = 1 / U^2 at t = 0.
  const IoUGradients g = piou_backward(batch_of({square(0, 0)}), batch_of({square(0.5, 0.5)}));
  const double u = 1.75;
  const double want = 1.0 / (u * u);
  EXPECT_NEAR(sum_component(g.d_a, 0, 4, 0), want, 1e-12);
  EXPECT_NEAR(sum_component(g.d_a, 0, 4, 0) + sum_component(g.d_b, 0, 4, 0), 0.0, 1e-12);
}

TEST(FiniteDiff, AgreesWithBackward) {
  GradcheckConfig cfg;
  std::size_t checked = 0;
  for (const auto& [a, b] : testing::convex_pairs(400, 4, 800)) {
    const SampleCheck sc = check_pair(a, b, cfg);
    if (sc.outcome == SampleOutcome::kSkipped) continue;
    ++checked;
    EXPECT_LE(sc.rel_error, 1e-4);
  }
  EXPECT_GT(checked, 100u);
}

TEST(FiniteDiff, RejectsBadStep) {
  const PolygonBatch a = batch_of({square(0, 0)});
  EXPECT_EQ(error_code([&] { finite_diff_grad(a, a, 0.0); }), ErrorCode::kInvalidArgument);
}

TEST(FiniteDiff, TranslationProbe) {
  const Corpus c = make_corpus(300, 4, 900);
  const IoUGradients g = piou_backward(c.a, c.b);
  const IoUGradients fd = finite_diff_grad(c.a, c.b, 1e-6);
  for (std::size_t r = 0; r < c.a.batch(); ++r) {
    for (int axis = 0; axis < 2; ++axis) {
      EXPECT_NEAR(sum_component(g.d_a, r, 4, axis) + sum_component(g.d_b, r, 4, axis), 0.0, 1e-10);
      if (g.degenerate[r] == 0) {
        EXPECT_NEAR(sum_component(fd.d_a, r, 4, axis) + sum_component(fd.d_b, r, 4, axis), 0.0, 1e-6);
      }
    }
  }
}

TEST(FiniteDiff, StepSweepIsVShaped) {
  // Worst error over a well-conditioned set: truncation dominates at large h,
  // round-off at small h.
  std::vector<Polygon> as;
  std::vector<Polygon> bs;
  GradcheckConfig cfg;
  for (const auto& [a, b] : testing::convex_pairs(400, 4, 1000)) {
    if (!conditioning_problem(a, b, cfg.margin).empty()) continue;
    as.push_back(a);
    bs.push_back(b);
    if (as.size() == 50) break;
  }
  const PolygonBatch a = batch_of(as);
  const PolygonBatch b = batch_of(bs);
  const IoUGradients g = piou_backward(a, b);
  std::vector<double> err;
  for (double h : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) {
    err.push_back(gradient_rel_error(g, finite_diff_grad(a, b, h)));
  }
  const auto best = std::min_element(err.begin(), err.end());
  EXPECT_NE(best, err.begin());
  EXPECT_NE(best, err.end() - 1);
  EXPECT_GT(err.front(), 10 * *best);
  EXPECT_GT(err.back(), 10 * *best);
}

TEST(PiouBackward, AscentStepSanity) {
  const Corpus c = make_corpus(500, 4, 1100);
  const IoUGradients g = piou_backward(c.a, c.b);
  const double step = 1e-5;
  std::vector<double> moved(c.a.data().begin(), c.a.data().end());
  double norm2 = 0.0;
  for (std::size_t i = 0; i < moved.size(); ++i) {
    moved[i] += step * g.d_a[i];
    norm2 += g.d_a[i] * g.d_a[i];
  }
  const std::vector<double> after =
      piou_batch(PolygonBatch(c.a.batch(), 4, moved), c.b);
  for (std::size_t r = 0; r < after.size(); ++r) {
    EXPECT_GE(after[r], g.value[r] - 10.0 * step * step * (1.0 + norm2)) << "row " << r;
  }
}

}  // namespace
}  // namespace piou
