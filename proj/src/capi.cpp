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

#include "piou/piou.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "piou/batch.hpp"
#include "piou/error.hpp"
#include "piou/geometry.hpp"
#include "piou/gradcheck.hpp"
#include "piou/raster.hpp"
#include "piou/sim.hpp"

struct piou_batch {
  piou::PolygonBatch impl;
};

struct piou_rng {
  piou::Rng impl;
};

struct piou_gradcheck {
  piou::GradcheckReport impl;
  std::size_t sides = 0;
};

struct piou_experiment {
  piou::ExperimentResult impl;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_skip_reason;

piou_status fail(piou_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <class Fn>
piou_status guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return PIOU_OK;
  } catch (const piou::Error& e) {
    return fail(static_cast<piou_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PIOU_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PIOU_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PIOU_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw piou::Error(piou::ErrorCode::kInvalidArgument, what);
}

std::vector<piou::Point2> points(const double* xy, std::size_t count) {
  require(xy != nullptr || count == 0, "null coordinate array");
  std::vector<piou::Point2> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = {xy[2 * i], xy[2 * i + 1]};
  return out;
}

piou::Polygon polygon(const double* xy, std::size_t count) { return piou::Polygon(points(xy, count)); }

void write_points(std::span<const piou::Point2> pts, double* out) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out[2 * i] = pts[i].x;
    out[2 * i + 1] = pts[i].y;
  }
}

piou::LossSpec loss_spec(piou_loss_kind kind, double w_l1, double w_piou) {
  piou::LossSpec spec;
  switch (kind) {
    case PIOU_LOSS_L1:
      spec.kind = piou::LossKind::kL1;
      break;
    case PIOU_LOSS_PIOU:
      spec.kind = piou::LossKind::kPIoU;
      break;
    case PIOU_LOSS_COMBINED:
      spec.kind = piou::LossKind::kCombined;
      break;
    default:
      require(false, "unknown loss kind");
  }
  spec.w_l1 = w_l1;
  spec.w_piou = w_piou;
  return spec;
}

piou::KernelOptions kernel(const piou_kernel_options* options) {
  piou::KernelOptions k;
  if (options != nullptr) {
    k.paper_faithful = options->paper_faithful != 0;
    k.parallel = options->parallel != 0;
  }
  return k;
}

void copy_out(const std::vector<double>& src, double* dst) {
  if (dst != nullptr) std::copy(src.begin(), src.end(), dst);
}

void copy_out(const std::vector<std::uint8_t>& src, uint8_t* dst) {
  if (dst != nullptr) std::copy(src.begin(), src.end(), dst);
}

piou::GradcheckConfig gradcheck_config(const piou_gradcheck_config* cfg) {
  piou::GradcheckConfig out;
  if (cfg == nullptr) return out;
  out.samples = cfg->samples;
  out.sides = cfg->sides;
  out.seed = cfg->seed;
  out.h = cfg->h;
  out.tolerance = cfg->tolerance;
  out.margin = cfg->margin;
  out.kernel = kernel(&cfg->kernel);
  return out;
}

piou_iteration_record to_c(const piou::IterationRecord& r) {
  return {r.iteration, r.mean_piou, r.mean_loss, r.wall_ms, r.nonconvex_fraction};
}

}  // namespace

extern "C" {

const char* piou_version(void) { return "1.0.0"; }

const char* piou_status_name(piou_status status) {
  switch (status) {
    case PIOU_OK:
      return "ok";
    case PIOU_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case PIOU_ERR_SHAPE_MISMATCH:
      return "shape mismatch";
    case PIOU_ERR_NON_FINITE:
      return "non-finite value";
    case PIOU_ERR_DEGENERATE:
      return "degenerate polygon";
    case PIOU_ERR_NON_CONVEX:
      return "non-convex polygon";
    case PIOU_ERR_NUMERIC:
      return "numerical failure";
    case PIOU_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* piou_last_error_message(void) { return g_last_error.c_str(); }

piou_status piou_pair(const double* a_xy, size_t a_count, const double* b_xy, size_t b_count, int lenient,
                      piou_pair_result* out) {
  return guard([&] {
    require(out != nullptr, "null output");
    const piou::PairResult r = piou::piou_pair(polygon(a_xy, a_count), polygon(b_xy, b_count),
                                               lenient ? piou::Convexity::kLenient : piou::Convexity::kStrict);
    *out = {r.iou, r.area_a, r.area_b, r.area_i, r.degenerate ? 1 : 0};
  });
}

piou_status piou_shoelace_area(const double* xy, size_t count, double* out_area) {
  return guard([&] {
    require(out_area != nullptr, "null output");
    *out_area = piou::shoelace_area(points(xy, count));
  });
}

piou_status piou_order_clockwise(const double* xy, size_t count, double* out_xy) {
  return guard([&] {
    require(out_xy != nullptr, "null output");
    const piou::Polygon ordered = piou::order_clockwise(polygon(xy, count));
    write_points(ordered.vertices(), out_xy);
  });
}

piou_status piou_is_convex(const double* xy, size_t count, int* out_convex) {
  return guard([&] {
    require(out_convex != nullptr, "null output");
    const piou::Polygon p = polygon(xy, count);
    *out_convex = !piou::is_collinear(p.vertices()) && piou::is_convex(piou::order_clockwise(p).vertices());
  });
}

void piou_raster_config_default(piou_raster_config* cfg) {
  if (cfg == nullptr) return;
  const piou::RasterConfig d;
  cfg->resolution = d.resolution;
  cfg->padding = d.padding;
}

piou_status piou_raster_iou(const double* a_xy, size_t a_count, const double* b_xy, size_t b_count,
                            const piou_raster_config* cfg, double* out_iou) {
  return guard([&] {
    require(out_iou != nullptr, "null output");
    piou::RasterConfig rc;
    if (cfg != nullptr) {
      rc.resolution = cfg->resolution;
      rc.padding = cfg->padding;
    }
    *out_iou = piou::raster_iou(polygon(a_xy, a_count), polygon(b_xy, b_count), rc);
  });
}

piou_status piou_batch_create(size_t batch, size_t sides, const double* xy, const uint8_t* valid,
                              piou_batch** out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = nullptr;
    require(xy != nullptr || batch == 0, "null coordinate array");
    std::vector<double> data(xy, xy + batch * sides * 2);
    std::vector<std::uint8_t> mask;
    if (valid != nullptr) mask.assign(valid, valid + batch * sides);
    auto handle = std::make_unique<piou_batch>(piou_batch{piou::PolygonBatch(batch, sides, std::move(data),
                                                                             std::move(mask))});
    *out = handle.release();
  });
}

void piou_batch_destroy(piou_batch* batch) { delete batch; }

size_t piou_batch_size(const piou_batch* batch) { return batch == nullptr ? 0 : batch->impl.batch(); }

size_t piou_batch_sides(const piou_batch* batch) { return batch == nullptr ? 0 : batch->impl.sides(); }

piou_status piou_batch_forward(const piou_batch* a, const piou_batch* b, const piou_kernel_options* options,
                               double* values) {
  return guard([&] {
    require(a != nullptr && b != nullptr && values != nullptr, "null argument");
    copy_out(piou::piou_batch(a->impl, b->impl, kernel(options)), values);
  });
}

piou_status piou_batch_backward(const piou_batch* a, const piou_batch* b, const piou_kernel_options* options,
                                double* values, double* grad_a, double* grad_b, uint8_t* degenerate) {
  return guard([&] {
    require(a != nullptr && b != nullptr, "null batch");
    const piou::IoUGradients g = piou::piou_backward(a->impl, b->impl, kernel(options));
    copy_out(g.value, values);
    copy_out(g.d_a, grad_a);
    copy_out(g.d_b, grad_b);
    copy_out(g.degenerate, degenerate);
  });
}

piou_status piou_batch_loss(const piou_batch* a, const piou_batch* b, const piou_kernel_options* options,
                            double* loss, double* grad_a, double* grad_b, uint8_t* degenerate) {
  return guard([&] {
    require(a != nullptr && b != nullptr, "null batch");
    const piou::LossGradients g = piou::piou_loss(a->impl, b->impl, kernel(options));
    copy_out(g.loss, loss);
    copy_out(g.grads.d_a, grad_a);
    copy_out(g.grads.d_b, grad_b);
    copy_out(g.grads.degenerate, degenerate);
  });
}

piou_status piou_batch_finite_diff(const piou_batch* a, const piou_batch* b, const piou_kernel_options* options,
                                   double h, double* grad_a, double* grad_b) {
  return guard([&] {
    require(a != nullptr && b != nullptr, "null batch");
    const piou::IoUGradients g = piou::finite_diff_grad(a->impl, b->impl, h, kernel(options));
    copy_out(g.d_a, grad_a);
    copy_out(g.d_b, grad_b);
  });
}

piou_status piou_two_face_loss(const piou_batch* front_pred, const piou_batch* front_gt,
                               const piou_batch* back_pred, const piou_batch* back_gt, piou_loss_kind kind,
                               double w_l1, double w_piou, int mean, const piou_kernel_options* options,
                               double* loss, double* grad_front, double* grad_back) {
  return guard([&] {
    require(front_pred != nullptr && front_gt != nullptr && back_pred != nullptr && back_gt != nullptr,
            "null batch");
    const piou::LossValue v = piou::two_face_loss(
        front_pred->impl, front_gt->impl, back_pred->impl, back_gt->impl, loss_spec(kind, w_l1, w_piou),
        mean != 0 ? piou::FaceReduction::kMean : piou::FaceReduction::kSum, kernel(options));
    const std::size_t half = v.grad.size() / 2;
    copy_out(v.loss, loss);
    if (grad_front != nullptr) std::copy_n(v.grad.begin(), half, grad_front);
    if (grad_back != nullptr) std::copy_n(v.grad.begin() + static_cast<std::ptrdiff_t>(half), half, grad_back);
  });
}

piou_status piou_rng_create(uint64_t seed, uint64_t stream, piou_rng** out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = new piou_rng{piou::Rng(seed, stream)};
  });
}

void piou_rng_destroy(piou_rng* rng) { delete rng; }

piou_status piou_random_polygon(piou_rng* rng, size_t sides, double scale, int convex, double* out_xy) {
  return guard([&] {
    require(rng != nullptr && out_xy != nullptr, "null argument");
    const piou::Polygon p = convex ? piou::gen_convex_polygon(rng->impl, sides, scale)
                                   : piou::gen_free_polygon(rng->impl, sides, scale);
    write_points(p.vertices(), out_xy);
  });
}

void piou_gradcheck_config_default(piou_gradcheck_config* cfg) {
  if (cfg == nullptr) return;
  const piou::GradcheckConfig d;
  *cfg = {d.samples, d.sides, d.seed, d.h, d.tolerance, d.margin, {0, 0}};
}

piou_status piou_gradcheck_run(const piou_gradcheck_config* cfg, piou_gradcheck** out) {
  return guard([&] {
    require(out != nullptr, "null output");
    const piou::GradcheckConfig c = gradcheck_config(cfg);
    *out = new piou_gradcheck{piou::run_gradcheck(c), c.sides};
  });
}

void piou_gradcheck_destroy(piou_gradcheck* report) { delete report; }

piou_status piou_gradcheck_get_summary(const piou_gradcheck* report, piou_gradcheck_summary* out) {
  return guard([&] {
    require(report != nullptr && out != nullptr, "null argument");
    const piou::GradcheckReport& r = report->impl;
    *out = {r.requested, r.checked, r.skipped, r.failures.size(), r.max_rel_error, r.tolerance, r.ok() ? 1 : 0};
  });
}

piou_status piou_gradcheck_get_failure(const piou_gradcheck* report, size_t index, size_t* draw, double* a_xy,
                                       double* b_xy, double* rel_error) {
  return guard([&] {
    require(report != nullptr, "null report");
    require(index < report->impl.failures.size(), "failure index out of range");
    const piou::GradcheckFailure& f = report->impl.failures[index];
    if (draw != nullptr) *draw = f.draw;
    if (a_xy != nullptr) write_points(f.a, a_xy);
    if (b_xy != nullptr) write_points(f.b, b_xy);
    if (rel_error != nullptr) *rel_error = f.rel_error;
  });
}

piou_status piou_gradcheck_pair(const double* a_xy, const double* b_xy, size_t sides,
                                const piou_gradcheck_config* cfg, piou_sample_outcome* outcome, double* rel_error,
                                const char** reason) {
  return guard([&] {
    require(outcome != nullptr, "null output");
    const piou::SampleCheck c = piou::check_pair(polygon(a_xy, sides), polygon(b_xy, sides), gradcheck_config(cfg));
    switch (c.outcome) {
      case piou::SampleOutcome::kPassed:
        *outcome = PIOU_SAMPLE_PASSED;
        break;
      case piou::SampleOutcome::kFailed:
        *outcome = PIOU_SAMPLE_FAILED;
        break;
      case piou::SampleOutcome::kSkipped:
        *outcome = PIOU_SAMPLE_SKIPPED;
        break;
    }
    if (rel_error != nullptr) *rel_error = c.rel_error;
    g_skip_reason = c.skip_reason;
    if (reason != nullptr) *reason = g_skip_reason.c_str();
  });
}

void piou_experiment_config_default(piou_experiment_config* cfg, piou_loss_kind loss) {
  if (cfg == nullptr) return;
  const piou::ExperimentConfig d;
  piou::LossSpec spec = d.loss;
  if (loss == PIOU_LOSS_L1) spec = piou::LossSpec::l1();
  if (loss == PIOU_LOSS_PIOU) spec = piou::LossSpec::piou();
  cfg->sides = d.sides;
  cfg->batch = d.batch;
  cfg->iterations = d.iterations;
  cfg->trials = d.trials;
  cfg->loss = loss;
  cfg->w_l1 = spec.w_l1;
  cfg->w_piou = spec.w_piou;
  cfg->seed = d.seed;
  cfg->convex = d.convex ? 1 : 0;
  cfg->init_offset = d.init_offset ? 1 : 0;
  cfg->init_offset_r = d.init_offset_r;
  cfg->scale = d.scale;
  cfg->lr = d.adam.lr;
  cfg->beta1 = d.adam.beta1;
  cfg->beta2 = d.adam.beta2;
  cfg->eps = d.adam.eps;
  cfg->kernel = {d.kernel.paper_faithful ? 1 : 0, d.kernel.parallel ? 1 : 0};
  cfg->parallel_trials = d.parallel_trials ? 1 : 0;
}

piou_status piou_experiment_run(const piou_experiment_config* cfg, piou_experiment** out) {
  return guard([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    piou::ExperimentConfig c;
    c.sides = cfg->sides;
    c.batch = cfg->batch;
    c.iterations = cfg->iterations;
    c.trials = cfg->trials;
    c.loss = loss_spec(cfg->loss, cfg->w_l1, cfg->w_piou);
    c.seed = cfg->seed;
    c.convex = cfg->convex != 0;
    c.init_offset = cfg->init_offset != 0;
    c.init_offset_r = cfg->init_offset_r;
    c.scale = cfg->scale;
    c.adam = {cfg->lr, cfg->beta1, cfg->beta2, cfg->eps};
    c.kernel = kernel(&cfg->kernel);
    c.parallel_trials = cfg->parallel_trials != 0;
    *out = new piou_experiment{piou::run_experiment(c)};
  });
}

void piou_experiment_destroy(piou_experiment* exp) { delete exp; }

size_t piou_experiment_trials(const piou_experiment* exp) { return exp == nullptr ? 0 : exp->impl.trials.size(); }

size_t piou_experiment_iterations(const piou_experiment* exp) {
  return exp == nullptr ? 0 : exp->impl.aggregate.size();
}

piou_status piou_experiment_record(const piou_experiment* exp, size_t trial, size_t iteration,
                                   piou_iteration_record* out) {
  return guard([&] {
    require(exp != nullptr && out != nullptr, "null argument");
    require(trial < exp->impl.trials.size() && iteration < exp->impl.aggregate.size(), "index out of range");
    *out = to_c(exp->impl.trials[trial][iteration]);
  });
}

piou_status piou_experiment_aggregate(const piou_experiment* exp, size_t iteration, piou_iteration_record* out) {
  return guard([&] {
    require(exp != nullptr && out != nullptr, "null argument");
    require(iteration < exp->impl.aggregate.size(), "index out of range");
    *out = to_c(exp->impl.aggregate[iteration]);
  });
}

}  // extern "C"
