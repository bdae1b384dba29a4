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

/* C interface to the piou library: exact polygon IoU, its batched gradient,
 * the pixel-count reference, and the simulation harness.
 *
 * Polygons cross the boundary as interleaved coordinate arrays
 * (x0, y0, x1, y1, ...). Batches are [batch][sides][2] row-major. Every
 * function returns a piou_status; on failure piou_last_error_message()
 * describes the problem for the calling thread. Handles are opaque and must
 * be released with the matching *_destroy function.
 */

#ifndef PIOU_PIOU_H_
#define PIOU_PIOU_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PIOU_BUILDING_LIBRARY)
#    define PIOU_API __declspec(dllexport)
#  else
#    define PIOU_API __declspec(dllimport)
#  endif
#else
#  define PIOU_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum piou_status {
  PIOU_OK = 0,
  PIOU_ERR_INVALID_ARGUMENT = 1,
  PIOU_ERR_SHAPE_MISMATCH = 2,
  PIOU_ERR_NON_FINITE = 3,
  PIOU_ERR_DEGENERATE = 4,
  PIOU_ERR_NON_CONVEX = 5,
  PIOU_ERR_NUMERIC = 6,
  PIOU_ERR_INTERNAL = 99
} piou_status;

PIOU_API const char* piou_version(void);
PIOU_API const char* piou_status_name(piou_status status);
/* Message for the last failed call on this thread; "" if none. */
PIOU_API const char* piou_last_error_message(void);

/* ---- scalar geometry --------------------------------------------------- */

typedef struct piou_pair_result {
  double iou;
  double area_a;
  double area_b;
  double area_i;
  int degenerate; /* nonzero when an input has zero area; iou is then 0 */
} piou_pair_result;

/* lenient != 0 accepts non-convex input (approximate result). */
PIOU_API piou_status piou_pair(const double* a_xy, size_t a_count, const double* b_xy, size_t b_count,
                               int lenient, piou_pair_result* out);

PIOU_API piou_status piou_shoelace_area(const double* xy, size_t count, double* out_area);

/* Writes the clockwise ordering (starting at the first vertex) to out_xy,
 * which must hold 2 * count doubles. */
PIOU_API piou_status piou_order_clockwise(const double* xy, size_t count, double* out_xy);

PIOU_API piou_status piou_is_convex(const double* xy, size_t count, int* out_convex);

/* ---- pixel-count reference -------------------------------------------- */

typedef struct piou_raster_config {
  int resolution; /* pixels per axis, >= 16 */
  double padding; /* fraction of the joint bounding box added per side */
} piou_raster_config;

PIOU_API void piou_raster_config_default(piou_raster_config* cfg);

PIOU_API piou_status piou_raster_iou(const double* a_xy, size_t a_count, const double* b_xy, size_t b_count,
                                     const piou_raster_config* cfg, double* out_iou);

/* ---- batched kernel ---------------------------------------------------- */

typedef struct piou_batch piou_batch;

/* valid may be NULL (all vertices valid); otherwise batch * sides flags. */
PIOU_API piou_status piou_batch_create(size_t batch, size_t sides, const double* xy, const uint8_t* valid,
                                       piou_batch** out);
PIOU_API void piou_batch_destroy(piou_batch* batch);
PIOU_API size_t piou_batch_size(const piou_batch* batch);
PIOU_API size_t piou_batch_sides(const piou_batch* batch);

typedef struct piou_kernel_options {
  int paper_faithful; /* (0,0) fill values sorted by distance from the origin */
  int parallel;       /* split rows across threads; results are identical */
} piou_kernel_options;

/* options may be NULL for defaults. values holds batch doubles. */
PIOU_API piou_status piou_batch_forward(const piou_batch* a, const piou_batch* b,
                                        const piou_kernel_options* options, double* values);

/* PIoU and its gradient. grad_a / grad_b hold batch * sides * 2 doubles,
 * degenerate holds batch flags; any output may be NULL. */
PIOU_API piou_status piou_batch_backward(const piou_batch* a, const piou_batch* b,
                                         const piou_kernel_options* options, double* values, double* grad_a,
                                         double* grad_b, uint8_t* degenerate);

/* Same as piou_batch_backward for the loss 1 - PIoU. */
PIOU_API piou_status piou_batch_loss(const piou_batch* a, const piou_batch* b,
                                     const piou_kernel_options* options, double* loss, double* grad_a,
                                     double* grad_b, uint8_t* degenerate);

PIOU_API piou_status piou_batch_finite_diff(const piou_batch* a, const piou_batch* b,
                                            const piou_kernel_options* options, double h, double* grad_a,
                                            double* grad_b);

/* ---- random polygons --------------------------------------------------- */

typedef struct piou_rng piou_rng;

PIOU_API piou_status piou_rng_create(uint64_t seed, uint64_t stream, piou_rng** out);
PIOU_API void piou_rng_destroy(piou_rng* rng);

/* convex != 0 draws a convex polygon; otherwise an unrestricted one.
 * out_xy holds 2 * sides doubles. */
PIOU_API piou_status piou_random_polygon(piou_rng* rng, size_t sides, double scale, int convex, double* out_xy);

/* ---- gradient verification --------------------------------------------- */

typedef enum piou_sample_outcome {
  PIOU_SAMPLE_PASSED = 0,
  PIOU_SAMPLE_FAILED = 1,
  PIOU_SAMPLE_SKIPPED = 2
} piou_sample_outcome;

typedef struct piou_gradcheck_config {
  size_t samples;
  size_t sides;
  uint64_t seed;
  double h;
  double tolerance;
  double margin;
  piou_kernel_options kernel;
} piou_gradcheck_config;

typedef struct piou_gradcheck_summary {
  size_t requested;
  size_t checked;
  size_t skipped;
  size_t failed;
  double max_rel_error;
  double tolerance;
  int ok;
} piou_gradcheck_summary;

typedef struct piou_gradcheck piou_gradcheck;

PIOU_API void piou_gradcheck_config_default(piou_gradcheck_config* cfg);
PIOU_API piou_status piou_gradcheck_run(const piou_gradcheck_config* cfg, piou_gradcheck** out);
PIOU_API void piou_gradcheck_destroy(piou_gradcheck* report);
PIOU_API piou_status piou_gradcheck_get_summary(const piou_gradcheck* report, piou_gradcheck_summary* out);

/* Failure i of the report. a_xy / b_xy hold 2 * sides doubles. */
PIOU_API piou_status piou_gradcheck_get_failure(const piou_gradcheck* report, size_t index, size_t* draw,
                                                double* a_xy, double* b_xy, double* rel_error);

/* Checks one pair of equal-size polygons. reason (may be NULL) receives a
 * static-lifetime-until-next-call string naming why a sample was skipped. */
PIOU_API piou_status piou_gradcheck_pair(const double* a_xy, const double* b_xy, size_t sides,
                                         const piou_gradcheck_config* cfg, piou_sample_outcome* outcome,
                                         double* rel_error, const char** reason);

/* ---- simulation harness ------------------------------------------------ */

typedef enum piou_loss_kind { PIOU_LOSS_L1 = 0, PIOU_LOSS_PIOU = 1, PIOU_LOSS_COMBINED = 2 } piou_loss_kind;

/* Loss of a box given as two quadrilateral faces: front and back batches of
 * equal shape. mean != 0 averages the two face losses, otherwise sums them.
 * loss holds batch doubles; grad_front / grad_back hold batch * sides * 2
 * doubles each and may be NULL. */
PIOU_API piou_status piou_two_face_loss(const piou_batch* front_pred, const piou_batch* front_gt,
                                        const piou_batch* back_pred, const piou_batch* back_gt,
                                        piou_loss_kind kind, double w_l1, double w_piou, int mean,
                                        const piou_kernel_options* options, double* loss, double* grad_front,
                                        double* grad_back);

typedef struct piou_experiment_config {
  size_t sides;
  size_t batch;
  size_t iterations;
  size_t trials;
  piou_loss_kind loss;
  double w_l1;
  double w_piou;
  uint64_t seed;
  int convex;
  int init_offset;
  double init_offset_r;
  double scale;
  double lr;
  double beta1;
  double beta2;
  double eps;
  piou_kernel_options kernel;
  int parallel_trials;
} piou_experiment_config;

typedef struct piou_iteration_record {
  size_t iteration;
  double mean_piou;
  double mean_loss;
  double wall_ms;
  double nonconvex_fraction;
} piou_iteration_record;

typedef struct piou_experiment piou_experiment;

/* Fills defaults, with loss weights matching the given kind. */
PIOU_API void piou_experiment_config_default(piou_experiment_config* cfg, piou_loss_kind loss);
PIOU_API piou_status piou_experiment_run(const piou_experiment_config* cfg, piou_experiment** out);
PIOU_API void piou_experiment_destroy(piou_experiment* exp);
PIOU_API size_t piou_experiment_trials(const piou_experiment* exp);
PIOU_API size_t piou_experiment_iterations(const piou_experiment* exp);
PIOU_API piou_status piou_experiment_record(const piou_experiment* exp, size_t trial, size_t iteration,
                                            piou_iteration_record* out);
PIOU_API piou_status piou_experiment_aggregate(const piou_experiment* exp, size_t iteration,
                                               piou_iteration_record* out);

#ifdef __cplusplus
}
#endif

#endif /* PIOU_PIOU_H_ */
