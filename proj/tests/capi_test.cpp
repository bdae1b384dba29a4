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

// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "piou/piou.h"

namespace {

const std::vector<double> kSquare = {0, 0, 1, 0, 1, 1, 0, 1};
const std::vector<double> kShifted = {0.5, 0, 1.5, 0, 1.5, 1, 0.5, 1};
const std::vector<double> kQuad = {0.3, 0.2, 1.4, 0.45, 1.2, 1.5, 0.25, 0.9};

struct BatchHandle {
  piou_batch* p = nullptr;
  ~BatchHandle() { piou_batch_destroy(p); }
};

std::vector<double> tile(const std::vector<double>& poly, std::size_t n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.insert(out.end(), poly.begin(), poly.end());
  return out;
}

TEST(CApi, StatusNames) {
  EXPECT_STREQ(piou_status_name(PIOU_OK), "ok");
  EXPECT_STREQ(piou_status_name(PIOU_ERR_DEGENERATE), "degenerate polygon");
  EXPECT_STREQ(piou_status_name(static_cast<piou_status>(42)), "unknown status");
  EXPECT_STRNE(piou_version(), "");
}

TEST(CApi, PairExamples) {
  piou_pair_result r;
  ASSERT_EQ(piou_pair(kSquare.data(), 4, kSquare.data(), 4, 0, &r), PIOU_OK);
  EXPECT_DOUBLE_EQ(r.iou, 1.0);
  ASSERT_EQ(piou_pair(kSquare.data(), 4, kShifted.data(), 4, 0, &r), PIOU_OK);
  EXPECT_NEAR(r.iou, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.area_i, 0.5, 1e-12);
  EXPECT_EQ(r.degenerate, 0);
  EXPECT_STREQ(piou_last_error_message(), "");
}

TEST(CApi, ErrorsSetLastMessage) {
  piou_pair_result r;
  EXPECT_EQ(piou_pair(kSquare.data(), 4, kSquare.data(), 4, 0, nullptr), PIOU_ERR_INVALID_ARGUMENT);
  EXPECT_STRNE(piou_last_error_message(), "");
  EXPECT_EQ(piou_pair(kSquare.data(), 2, kSquare.data(), 4, 0, &r), PIOU_ERR_INVALID_ARGUMENT);
  std::vector<double> bad = kSquare;
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(piou_pair(bad.data(), 4, kSquare.data(), 4, 0, &r), PIOU_ERR_NON_FINITE);
  const std::vector<double> arrow = {0, 0, 2, 1, 0, 2, 0.5, 1};
  EXPECT_EQ(piou_pair(arrow.data(), 4, kSquare.data(), 4, 0, &r), PIOU_ERR_NON_CONVEX);
  EXPECT_EQ(piou_pair(arrow.data(), 4, kSquare.data(), 4, 1, &r), PIOU_OK);
  // A successful call clears the message.
  ASSERT_EQ(piou_pair(kSquare.data(), 4, kSquare.data(), 4, 0, &r), PIOU_OK);
  EXPECT_STREQ(piou_last_error_message(), "");
}

TEST(CApi, GeometryHelpers) {
  double area = 0;
  ASSERT_EQ(piou_shoelace_area(kSquare.data(), 4, &area), PIOU_OK);
  EXPECT_DOUBLE_EQ(area, 1.0);
  std::vector<double> cw(8);
  ASSERT_EQ(piou_order_clockwise(kSquare.data(), 4, cw.data()), PIOU_OK);
  EXPECT_EQ(cw, (std::vector<double>{0, 0, 0, 1, 1, 1, 1, 0}));
  int convex = 0;
  ASSERT_EQ(piou_is_convex(kSquare.data(), 4, &convex), PIOU_OK);
  EXPECT_EQ(convex, 1);
}

TEST(CApi, Raster) {
  piou_raster_config cfg;
  piou_raster_config_default(&cfg);
  double iou = 0;
  ASSERT_EQ(piou_raster_iou(kSquare.data(), 4, kShifted.data(), 4, &cfg, &iou), PIOU_OK);
  EXPECT_NEAR(iou, 1.0 / 3.0, 5e-3);
  cfg.resolution = 4;
  EXPECT_EQ(piou_raster_iou(kSquare.data(), 4, kShifted.data(), 4, &cfg, &iou), PIOU_ERR_INVALID_ARGUMENT);
}

TEST(CApi, BatchForwardBackwardLoss) {
  const std::size_t n = 3;
  BatchHandle a, b;
  ASSERT_EQ(piou_batch_create(n, 4, tile(kSquare, n).data(), nullptr, &a.p), PIOU_OK);
  ASSERT_EQ(piou_batch_create(n, 4, tile(kShifted, n).data(), nullptr, &b.p), PIOU_OK);
  EXPECT_EQ(piou_batch_size(a.p), n);
  EXPECT_EQ(piou_batch_sides(a.p), 4u);

  std::vector<double> values(n), loss(n), ga(n * 8), gb(n * 8), la(n * 8);
  std::vector<uint8_t> deg(n);
  ASSERT_EQ(piou_batch_forward(a.p, b.p, nullptr, values.data()), PIOU_OK);
  for (double v : values) EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
  ASSERT_EQ(piou_batch_backward(a.p, b.p, nullptr, values.data(), ga.data(), gb.data(), deg.data()), PIOU_OK);
  ASSERT_EQ(piou_batch_loss(a.p, b.p, nullptr, loss.data(), la.data(), nullptr, nullptr), PIOU_OK);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(loss[i], 1.0 - values[i], 1e-15);
  for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_DOUBLE_EQ(la[i], -ga[i]);

  piou_kernel_options opts{1, 1};
  std::vector<double> faithful(n);
  ASSERT_EQ(piou_batch_forward(a.p, b.p, &opts, faithful.data()), PIOU_OK);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(faithful[i], values[i], 1e-12);
}

TEST(CApi, FiniteDifferenceMatchesBackward) {
  BatchHandle a, b;
  ASSERT_EQ(piou_batch_create(1, 4, kSquare.data(), nullptr, &a.p), PIOU_OK);
  ASSERT_EQ(piou_batch_create(1, 4, kQuad.data(), nullptr, &b.p), PIOU_OK);
  std::vector<double> ga(8), gb(8), fa(8), fb(8);
  ASSERT_EQ(piou_batch_backward(a.p, b.p, nullptr, nullptr, ga.data(), gb.data(), nullptr), PIOU_OK);
  ASSERT_EQ(piou_batch_finite_diff(a.p, b.p, nullptr, 1e-6, fa.data(), fb.data()), PIOU_OK);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(fa[i], ga[i], 1e-6);
    EXPECT_NEAR(fb[i], gb[i], 1e-6);
  }
}

TEST(CApi, BatchErrors) {
  BatchHandle a, b;
  EXPECT_EQ(piou_batch_create(1, 4, kSquare.data(), nullptr, nullptr), PIOU_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(piou_batch_create(1, 4, nullptr, nullptr, &a.p), PIOU_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(a.p, nullptr);
  ASSERT_EQ(piou_batch_create(1, 4, kSquare.data(), nullptr, &a.p), PIOU_OK);
  ASSERT_EQ(piou_batch_create(2, 4, tile(kSquare, 2).data(), nullptr, &b.p), PIOU_OK);
  double v[2];
  EXPECT_EQ(piou_batch_forward(a.p, b.p, nullptr, v), PIOU_ERR_SHAPE_MISMATCH);
  EXPECT_EQ(piou_batch_forward(a.p, nullptr, nullptr, v), PIOU_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(piou_batch_size(nullptr), 0u);
  piou_batch_destroy(nullptr);
}

TEST(CApi, MaskedBatch) {
  // Six-wide rows holding a square plus two masked junk vertices.
  std::vector<double> xy = {0, 0, 1, 0, 1, 1, 0, 1, 9, 9, -9, 3};
  const std::vector<uint8_t> valid = {1, 1, 1, 1, 0, 0};
  std::vector<double> shifted = {0.5, 0, 1.5, 0, 1.5, 1, 0.5, 1, 7, 7, 7, -7};
  BatchHandle a, b;
  ASSERT_EQ(piou_batch_create(1, 6, xy.data(), valid.data(), &a.p), PIOU_OK);
  ASSERT_EQ(piou_batch_create(1, 6, shifted.data(), valid.data(), &b.p), PIOU_OK);
  double v = 0;
  ASSERT_EQ(piou_batch_forward(a.p, b.p, nullptr, &v), PIOU_OK);
  EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
}

TEST(CApi, TwoFaceLoss) {
  const std::size_t n = 2;
  BatchHandle fp, fg, bp, bg;
  ASSERT_EQ(piou_batch_create(n, 4, tile(kShifted, n).data(), nullptr, &fp.p), PIOU_OK);
  ASSERT_EQ(piou_batch_create(n, 4, tile(kSquare, n).data(), nullptr, &fg.p), PIOU_OK);
  ASSERT_EQ(piou_batch_create(n, 4, tile(kSquare, n).data(), nullptr, &bp.p), PIOU_OK);
  ASSERT_EQ(piou_batch_create(n, 4, tile(kSquare, n).data(), nullptr, &bg.p), PIOU_OK);
  std::vector<double> sum(n), mean(n), gf(n * 8), gbk(n * 8);
  ASSERT_EQ(piou_two_face_loss(fp.p, fg.p, bp.p, bg.p, PIOU_LOSS_PIOU, 0, 1, 0, nullptr, sum.data(), gf.data(),
                               gbk.data()),
            PIOU_OK);
  ASSERT_EQ(piou_two_face_loss(fp.p, fg.p, bp.p, bg.p, PIOU_LOSS_PIOU, 0, 1, 1, nullptr, mean.data(), nullptr,
                               nullptr),
            PIOU_OK);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(sum[i], 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(mean[i], 1.0 / 3.0, 1e-12);
  }
  for (double g : gbk) EXPECT_EQ(g, 0.0);
}

TEST(CApi, RngIsDeterministic) {
  piou_rng* r1 = nullptr;
  piou_rng* r2 = nullptr;
  ASSERT_EQ(piou_rng_create(11, 2, &r1), PIOU_OK);
  ASSERT_EQ(piou_rng_create(11, 2, &r2), PIOU_OK);
  std::vector<double> p1(8), p2(8);
  ASSERT_EQ(piou_random_polygon(r1, 4, 1.0, 1, p1.data()), PIOU_OK);
  ASSERT_EQ(piou_random_polygon(r2, 4, 1.0, 1, p2.data()), PIOU_OK);
  EXPECT_EQ(p1, p2);
  int convex = 0;
  ASSERT_EQ(piou_is_convex(p1.data(), 4, &convex), PIOU_OK);
  EXPECT_EQ(convex, 1);
  EXPECT_EQ(piou_random_polygon(r1, 2, 1.0, 1, p1.data()), PIOU_ERR_INVALID_ARGUMENT);
  piou_rng_destroy(r1);
  piou_rng_destroy(r2);
}

TEST(CApi, Gradcheck) {
  piou_gradcheck_config cfg;
  piou_gradcheck_config_default(&cfg);
  cfg.samples = 50;
  cfg.seed = 3;
  piou_gradcheck* rep = nullptr;
  ASSERT_EQ(piou_gradcheck_run(&cfg, &rep), PIOU_OK);
  piou_gradcheck_summary s;
  ASSERT_EQ(piou_gradcheck_get_summary(rep, &s), PIOU_OK);
  EXPECT_EQ(s.requested, 50u);
  EXPECT_EQ(s.checked, 50u);
  EXPECT_EQ(s.failed, 0u);
  EXPECT_EQ(s.ok, 1);
  EXPECT_LE(s.max_rel_error, cfg.tolerance);
  size_t draw = 0;
  EXPECT_EQ(piou_gradcheck_get_failure(rep, 0, &draw, nullptr, nullptr, nullptr), PIOU_ERR_INVALID_ARGUMENT);
  piou_gradcheck_destroy(rep);

  piou_sample_outcome outcome;
  double rel = 1;
  const char* reason = nullptr;
  ASSERT_EQ(piou_gradcheck_pair(kSquare.data(), kQuad.data(), 4, &cfg, &outcome, &rel, &reason), PIOU_OK);
  EXPECT_EQ(outcome, PIOU_SAMPLE_PASSED) << reason;
  ASSERT_EQ(piou_gradcheck_pair(kSquare.data(), kShifted.data(), 4, &cfg, &outcome, &rel, &reason), PIOU_OK);
  EXPECT_EQ(outcome, PIOU_SAMPLE_SKIPPED);
  EXPECT_STRNE(reason, "");
}

TEST(CApi, Experiment) {
  piou_experiment_config cfg;
  piou_experiment_config_default(&cfg, PIOU_LOSS_COMBINED);
  EXPECT_EQ(cfg.sides, 4u);
  EXPECT_EQ(cfg.w_l1, 1.0);
  EXPECT_EQ(cfg.w_piou, 1.0);
  cfg.batch = 4;
  cfg.trials = 2;
  cfg.iterations = 20;
  piou_experiment* exp = nullptr;
  ASSERT_EQ(piou_experiment_run(&cfg, &exp), PIOU_OK);
  EXPECT_EQ(piou_experiment_trials(exp), 2u);
  EXPECT_EQ(piou_experiment_iterations(exp), 20u);
  piou_iteration_record r0, r1, agg;
  ASSERT_EQ(piou_experiment_record(exp, 0, 19, &r0), PIOU_OK);
  ASSERT_EQ(piou_experiment_record(exp, 1, 19, &r1), PIOU_OK);
  ASSERT_EQ(piou_experiment_aggregate(exp, 19, &agg), PIOU_OK);
  EXPECT_EQ(agg.iteration, 19u);
  EXPECT_NEAR(agg.mean_piou, 0.5 * (r0.mean_piou + r1.mean_piou), 1e-12);
  EXPECT_EQ(piou_experiment_record(exp, 2, 0, &r0), PIOU_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(piou_experiment_aggregate(exp, 20, &agg), PIOU_ERR_INVALID_ARGUMENT);
  piou_experiment_destroy(exp);

  cfg.lr = -1;
  EXPECT_EQ(piou_experiment_run(&cfg, &exp), PIOU_ERR_INVALID_ARGUMENT);
}

}  // namespace
