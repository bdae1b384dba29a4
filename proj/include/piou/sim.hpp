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

#ifndef PIOU_SIM_HPP_
#define PIOU_SIM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "piou/batch.hpp"
#include "piou/geometry.hpp"

namespace piou {

/// Seeded generator with independent streams. Uniform doubles are built
/// from the raw 64-bit output so sequences match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

// Center in [-scale, scale]^2, radii in [kMinRadius, kMaxRadius] * scale.
inline constexpr double kMinRadius = 0.3;
inline constexpr double kMaxRadius = 1.0;

/// Convex P-gon from a random center, sorted random angles and random radii;
/// rejected draws are retried, and after 100 rejections a regular P-gon with
/// slightly jittered radii is returned. Vertices are counterclockwise.
Polygon gen_convex_polygon(Rng& rng, std::size_t sides, double scale = 1.0);

/// Same construction without the convexity test: simple (star-shaped about
/// the center) but usually non-convex for larger P.
Polygon gen_free_polygon(Rng& rng, std::size_t sides, double scale = 1.0);

enum class LossKind { kL1, kPIoU, kCombined };

struct LossSpec {
  LossKind kind = LossKind::kCombined;
  double w_l1 = 1.0;
  double w_piou = 1.0;

  static LossSpec l1() { return {LossKind::kL1, 1.0, 0.0}; }
  static LossSpec piou() { return {LossKind::kPIoU, 0.0, 1.0}; }
  static LossSpec combined(double w_l1 = 1.0, double w_piou = 1.0) {
    return {LossKind::kCombined, w_l1, w_piou};
  }

  void validate() const;
};

const char* loss_name(LossKind kind);

struct LossValue {
  std::vector<double> loss;  // per row
  std::vector<double> grad;  // d loss / d pred, [B][P][2]
  std::vector<double> piou;  // per-row PIoU when the PIoU term was evaluated
};

/// Mean absolute coordinate difference per row, index-aligned vertices.
/// Subgradient is sign(pred - gt) / 2P, zero at equality.
LossValue l1_loss(const PolygonBatch& pred, const PolygonBatch& gt);

/// w_l1 * L1 + w_piou * (1 - PIoU). A zero weight skips that term.
LossValue combined_loss(const PolygonBatch& pred, const PolygonBatch& gt, const LossSpec& spec,
                        const KernelOptions& options = {});

/// A 3D box projected as two quadrilateral faces (front and back corners).
/// The per-row loss combines the two face losses by sum or mean; `piou`
/// holds the mean of the two face values. `grad` is front rows, then back.
enum class FaceReduction { kSum, kMean };

LossValue two_face_loss(const PolygonBatch& front_pred, const PolygonBatch& front_gt,
                        const PolygonBatch& back_pred, const PolygonBatch& back_gt, const LossSpec& spec,
                        FaceReduction reduction, const KernelOptions& options = {});

struct AdamParams {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  AdamState(std::size_t size, AdamParams params = {});

  const AdamParams& params() const { return params_; }
  std::size_t steps() const { return steps_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  friend void adam_step(std::span<double>, std::span<const double>, AdamState&);

  AdamParams params_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t steps_ = 0;
};

/// Bias-corrected Adam update in place. Throws Error(kNumeric) on a
/// non-finite gradient, naming the first offending index.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

/// Shifts vertex i of every row by r times corner i of a regular P-gon of
/// circumradius 1 listed clockwise from (1, 0). For P = 4 these are the
/// corners of a square centered at the origin.
PolygonBatch convex_init_offset(const PolygonBatch& pred, double r);

struct ExperimentConfig {
  std::size_t sides = 4;
  std::size_t batch = 32;
  std::size_t iterations = 5000;
  std::size_t trials = 5;
  LossSpec loss;
  std::uint64_t seed = 0;
  bool convex = true;  // false: free polygons, no convexity restriction
  // Start predictions as coincident points plus convex_init_offset(r).
  bool init_offset = false;
  double init_offset_r = 0.1;
  double scale = 1.0;
  AdamParams adam;
  KernelOptions kernel;
  bool parallel_trials = false;

  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double mean_piou = 0.0;  // exact scalar IoU averaged over the batch
  double mean_loss = 0.0;
  double wall_ms = 0.0;    // since the start of the trial
  double nonconvex_fraction = 0.0;
};

struct ExperimentResult {
  std::vector<std::vector<IterationRecord>> trials;
  std::vector<IterationRecord> aggregate;  // per-iteration mean over trials
};

/// Ground truth and initial predictions for one trial. Both depend only on
/// (seed, trial), so every loss variant sees the same problems.
struct TrialData {
  PolygonBatch gt;
  PolygonBatch pred;
};
TrialData make_trial(const ExperimentConfig& cfg, std::size_t trial);

/// Mean exact IoU between matching rows, tolerating non-convex and
/// collapsed predictions (those score 0).
double mean_exact_iou(const PolygonBatch& pred, const PolygonBatch& gt, double* nonconvex_fraction = nullptr);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace piou

#endif  // PIOU_SIM_HPP_
