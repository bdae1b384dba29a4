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

#include "piou/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "piou/error.hpp"

namespace piou {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxRejections = 100;

std::seed_seq make_seed(std::uint64_t seed, std::uint64_t stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}

std::vector<Point2> radial_polygon(Rng& rng, std::size_t sides, double scale) {
  const Point2 center{rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
  // One angular offset per equal sector keeps vertex i in sector i, so index
  // i means the same corner across polygons.
  std::vector<double> angles(sides);
  const double sector = kTwoPi / static_cast<double>(sides);
  for (std::size_t i = 0; i < sides; ++i) angles[i] = sector * (static_cast<double>(i) + rng.uniform());
  std::sort(angles.begin(), angles.end());
  std::vector<Point2> out(sides);
  for (std::size_t i = 0; i < sides; ++i) {
    const double r = rng.uniform(kMinRadius, kMaxRadius) * scale;
    out[i] = {center.x + r * std::cos(angles[i]), center.y + r * std::sin(angles[i])};
  }
  return out;
}

void require_sides(std::size_t sides) {
  if (sides < 3) throw Error(ErrorCode::kInvalidArgument, "polygons need at least 3 sides");
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq = make_seed(seed, stream);
  engine_.seed(seq);
}

Polygon gen_convex_polygon(Rng& rng, std::size_t sides, double scale) {
  require_sides(sides);
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    std::vector<Point2> pts = radial_polygon(rng, sides, scale);
    if (!is_convex(pts)) continue;
    try {
      return Polygon(std::move(pts));
    } catch (const Error&) {
      // Two angles drew (nearly) the same value.
    }
  }
  const Point2 center{rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
  const double radius = rng.uniform(kMinRadius, kMaxRadius) * scale;
  const double phase = rng.uniform(0.0, kTwoPi);
  std::vector<Point2> regular(sides);
  std::vector<Point2> jittered(sides);
  for (std::size_t i = 0; i < sides; ++i) {
    const double t = phase + kTwoPi * static_cast<double>(i) / static_cast<double>(sides);
    const double r = radius * (1.0 + 1e-3 * rng.uniform(-1.0, 1.0));
    regular[i] = {center.x + radius * std::cos(t), center.y + radius * std::sin(t)};
    jittered[i] = {center.x + r * std::cos(t), center.y + r * std::sin(t)};
  }
  return Polygon(is_convex(jittered) ? std::move(jittered) : std::move(regular));
}

Polygon gen_free_polygon(Rng& rng, std::size_t sides, double scale) {
  require_sides(sides);
  for (;;) {
    std::vector<Point2> pts = radial_polygon(rng, sides, scale);
    if (is_collinear(pts)) continue;
    try {
      return Polygon(std::move(pts));
    } catch (const Error&) {
    }
  }
}

void LossSpec::validate() const {
  if (!(w_l1 >= 0.0) || !(w_piou >= 0.0) || !std::isfinite(w_l1) || !std::isfinite(w_piou)) {
    throw Error(ErrorCode::kInvalidArgument, "loss weights must be finite and non-negative");
  }
  if (kind == LossKind::kCombined && (w_l1 <= 0.0 || w_piou <= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "combined loss needs both weights > 0");
  }
  if (w_l1 == 0.0 && w_piou == 0.0) throw Error(ErrorCode::kInvalidArgument, "all loss weights are zero");
}

const char* loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::kL1:
      return "l1";
    case LossKind::kPIoU:
      return "piou";
    case LossKind::kCombined:
      return "combined";
  }
  return "unknown";
}

LossValue l1_loss(const PolygonBatch& pred, const PolygonBatch& gt) {
  if (pred.batch() != gt.batch() || pred.sides() != gt.sides()) {
    throw Error(ErrorCode::kShapeMismatch, "l1_loss: prediction and target shapes differ");
  }
  const std::size_t stride = pred.sides() * 2;
  const double inv = 1.0 / static_cast<double>(stride);
  LossValue out;
  out.loss.assign(pred.batch(), 0.0);
  out.grad.assign(pred.batch() * stride, 0.0);
  const auto p = pred.data();
  const auto g = gt.data();
  for (std::size_t r = 0; r < pred.batch(); ++r) {
    double acc = 0.0;
    for (std::size_t c = r * stride; c < (r + 1) * stride; ++c) {
      const double d = p[c] - g[c];
      acc += std::abs(d);
      out.grad[c] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
    }
    out.loss[r] = acc * inv;
  }
  return out;
}

LossValue combined_loss(const PolygonBatch& pred, const PolygonBatch& gt, const LossSpec& spec,
                        const KernelOptions& options) {
  spec.validate();
  LossValue out;
  out.loss.assign(pred.batch(), 0.0);
  out.grad.assign(pred.batch() * pred.sides() * 2, 0.0);
  if (spec.w_l1 > 0.0) {
    const LossValue l1 = l1_loss(pred, gt);
    for (std::size_t r = 0; r < out.loss.size(); ++r) out.loss[r] += spec.w_l1 * l1.loss[r];
    for (std::size_t c = 0; c < out.grad.size(); ++c) out.grad[c] += spec.w_l1 * l1.grad[c];
  }
  if (spec.w_piou > 0.0) {
    const LossGradients pl = piou_loss(pred, gt, options);
    for (std::size_t r = 0; r < out.loss.size(); ++r) out.loss[r] += spec.w_piou * pl.loss[r];
    for (std::size_t c = 0; c < out.grad.size(); ++c) out.grad[c] += spec.w_piou * pl.grads.d_a[c];
    out.piou = pl.grads.value;
  }
  return out;
}

LossValue two_face_loss(const PolygonBatch& front_pred, const PolygonBatch& front_gt,
                        const PolygonBatch& back_pred, const PolygonBatch& back_gt, const LossSpec& spec,
                        FaceReduction reduction, const KernelOptions& options) {
  if (front_pred.batch() != back_pred.batch() || front_pred.sides() != back_pred.sides()) {
    throw Error(ErrorCode::kShapeMismatch, "two_face_loss: front and back batches differ in shape");
  }
  const LossValue front = combined_loss(front_pred, front_gt, spec, options);
  const LossValue back = combined_loss(back_pred, back_gt, spec, options);
  const double w = reduction == FaceReduction::kMean ? 0.5 : 1.0;
  LossValue out;
  out.loss.resize(front.loss.size());
  for (std::size_t r = 0; r < out.loss.size(); ++r) out.loss[r] = w * (front.loss[r] + back.loss[r]);
  out.grad.reserve(front.grad.size() + back.grad.size());
  for (double g : front.grad) out.grad.push_back(w * g);
  for (double g : back.grad) out.grad.push_back(w * g);
  if (!front.piou.empty()) {
    out.piou.resize(front.piou.size());
    for (std::size_t r = 0; r < out.piou.size(); ++r) out.piou[r] = 0.5 * (front.piou[r] + back.piou[r]);
  }
  return out;
}

AdamState::AdamState(std::size_t size, AdamParams params)
    : params_(params), m_(size, 0.0), v_(size, 0.0) {
  if (!(params_.lr > 0.0) || !(params_.beta1 >= 0.0 && params_.beta1 < 1.0) ||
      !(params_.beta2 >= 0.0 && params_.beta2 < 1.0) || !(params_.eps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid Adam hyperparameters");
  }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "adam_step: parameter, gradient and state sizes differ");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw Error(ErrorCode::kNumeric, "non-finite gradient at index " + std::to_string(i) + " (value " +
                                           std::to_string(grads[i]) + ") after " +
                                           std::to_string(state.steps_) + " steps");
    }
  }
  const AdamParams& hp = state.params_;
  ++state.steps_;
  const double t = static_cast<double>(state.steps_);
  const double correct1 = 1.0 - std::pow(hp.beta1, t);
  const double correct2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m_[i] = hp.beta1 * state.m_[i] + (1.0 - hp.beta1) * grads[i];
    state.v_[i] = hp.beta2 * state.v_[i] + (1.0 - hp.beta2) * grads[i] * grads[i];
    const double m_hat = state.m_[i] / correct1;
    const double v_hat = state.v_[i] / correct2;
    params[i] -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps);
  }
}

PolygonBatch convex_init_offset(const PolygonBatch& pred, double r) {
  const std::size_t sides = pred.sides();
  std::vector<double> data(pred.data().begin(), pred.data().end());
  for (std::size_t i = 0; i < sides; ++i) {
    const double t = -kTwoPi * static_cast<double>(i) / static_cast<double>(sides);
    // Exact corners for the square case keep coincident inputs exactly square.
    double cx = std::cos(t);
    double cy = std::sin(t);
    if (sides == 4) {
      constexpr double kSquare[4][2] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
      cx = kSquare[i][0];
      cy = kSquare[i][1];
    }
    for (std::size_t b = 0; b < pred.batch(); ++b) {
      data[(b * sides + i) * 2] += r * cx;
      data[(b * sides + i) * 2 + 1] += r * cy;
    }
  }
  return PolygonBatch(pred.batch(), sides, std::move(data),
                      std::vector<std::uint8_t>(pred.valid().begin(), pred.valid().end()));
}

void ExperimentConfig::validate() const {
  if (sides < 3 || sides > kMaxSides) {
    throw Error(ErrorCode::kInvalidArgument, "sides must be in [3, " + std::to_string(kMaxSides) + "]");
  }
  if (batch < 1 || trials < 1 || iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "batch, trials and iterations must be at least 1");
  }
  if (!(scale > 0.0) || !(init_offset_r >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scale must be positive and the init offset non-negative");
  }
  loss.validate();
  AdamState probe(0, adam);
}

namespace {

PolygonBatch pack(const std::vector<Polygon>& polys) { return PolygonBatch::from_polygons(polys); }

}  // namespace

TrialData make_trial(const ExperimentConfig& cfg, std::size_t trial) {
  Rng gt_rng(cfg.seed, 2 * trial);
  Rng pred_rng(cfg.seed, 2 * trial + 1);
  auto draw = [&](Rng& rng) {
    return cfg.convex ? gen_convex_polygon(rng, cfg.sides, cfg.scale) : gen_free_polygon(rng, cfg.sides, cfg.scale);
  };
  std::vector<Polygon> gt;
  gt.reserve(cfg.batch);
  for (std::size_t b = 0; b < cfg.batch; ++b) gt.push_back(draw(gt_rng));

  if (!cfg.init_offset) {
    std::vector<Polygon> pred;
    pred.reserve(cfg.batch);
    for (std::size_t b = 0; b < cfg.batch; ++b) pred.push_back(draw(pred_rng));
    return {pack(gt), pack(pred)};
  }
  std::vector<double> collapsed;
  collapsed.reserve(cfg.batch * cfg.sides * 2);
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    const double cx = pred_rng.uniform(-cfg.scale, cfg.scale);
    const double cy = pred_rng.uniform(-cfg.scale, cfg.scale);
    for (std::size_t i = 0; i < cfg.sides; ++i) {
      collapsed.push_back(cx);
      collapsed.push_back(cy);
    }
  }
  const PolygonBatch coincident(cfg.batch, cfg.sides, std::move(collapsed));
  return {pack(gt), convex_init_offset(coincident, cfg.init_offset_r * cfg.scale)};
}

double mean_exact_iou(const PolygonBatch& pred, const PolygonBatch& gt, double* nonconvex_fraction) {
  double acc = 0.0;
  std::size_t nonconvex = 0;
  for (std::size_t r = 0; r < pred.batch(); ++r) {
    const Polygon target(gt.row_points(r));
    try {
      const Polygon p = Polygon::from_points_merged(pred.row_points(r));
      if (is_collinear(p.vertices())) {
        ++nonconvex;
        continue;
      }
      if (!is_convex(order_clockwise(p).vertices())) ++nonconvex;
      acc += piou_pair(p, target, Convexity::kLenient).iou;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate) throw;
      ++nonconvex;
    }
  }
  if (nonconvex_fraction != nullptr) {
    *nonconvex_fraction = static_cast<double>(nonconvex) / static_cast<double>(pred.batch());
  }
  return acc / static_cast<double>(pred.batch());
}

namespace {

std::vector<IterationRecord> run_trial(const ExperimentConfig& cfg, std::size_t trial) {
  using Clock = std::chrono::steady_clock;
  const TrialData data = make_trial(cfg, trial);
  const PolygonBatch& gt = data.gt;
  std::vector<double> params(data.pred.data().begin(), data.pred.data().end());
  AdamState state(params.size(), cfg.adam);
  std::vector<IterationRecord> log;
  log.reserve(cfg.iterations);
  const double inv_batch = 1.0 / static_cast<double>(cfg.batch);
  std::vector<double> grads(params.size());
  const auto start = Clock::now();
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const PolygonBatch pred(cfg.batch, cfg.sides, params);
    const LossValue lv = combined_loss(pred, gt, cfg.loss, cfg.kernel);
    IterationRecord rec;
    rec.iteration = it;
    for (double l : lv.loss) rec.mean_loss += l;
    rec.mean_loss *= inv_batch;
    rec.mean_piou = mean_exact_iou(pred, gt, &rec.nonconvex_fraction);
    for (std::size_t c = 0; c < grads.size(); ++c) grads[c] = lv.grad[c] * inv_batch;
    adam_step(params, grads, state);
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    log.push_back(rec);
  }
  return log;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  out.trials.resize(cfg.trials);
  if (cfg.parallel_trials && cfg.trials > 1) {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(cfg.trials);
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      pool.emplace_back([&, t] {
        try {
          out.trials[t] = run_trial(cfg, t);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t t = 0; t < cfg.trials; ++t) out.trials[t] = run_trial(cfg, t);
  }

  out.aggregate.resize(cfg.iterations);
  const double inv = 1.0 / static_cast<double>(cfg.trials);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    IterationRecord& agg = out.aggregate[it];
    agg.iteration = it;
    for (const auto& trial : out.trials) {
      agg.mean_piou += trial[it].mean_piou * inv;
      agg.mean_loss += trial[it].mean_loss * inv;
      agg.wall_ms += trial[it].wall_ms * inv;
      agg.nonconvex_fraction += trial[it].nonconvex_fraction * inv;
    }
  }
  return out;
}

}  // namespace piou
