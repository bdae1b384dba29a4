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

#ifndef PIOU_GRADCHECK_HPP_
#define PIOU_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "piou/batch.hpp"
#include "piou/geometry.hpp"

namespace piou {

struct GradcheckConfig {
  std::size_t samples = 1000;
  std::size_t sides = 4;
  std::uint64_t seed = 0;
  double h = 1e-6;
  double tolerance = 1e-4;
  // Minimum vertex-to-partner-boundary distance, as a fraction of the joint
  // bounding-box diagonal.
  double margin = 1e-3;
  KernelOptions kernel;
};

enum class SampleOutcome { kPassed, kFailed, kSkipped };

struct SampleCheck {
  SampleOutcome outcome = SampleOutcome::kSkipped;
  double rel_error = 0.0;
  std::string skip_reason;
};

/// Empty when the pair is far enough from every configuration change for
/// the frozen-active-set gradient to equal the true derivative; otherwise a
/// short reason.
std::string conditioning_problem(const Polygon& a, const Polygon& b, double margin);

/// max |analytic - numeric| over all coordinates of both polygons, divided by
/// the largest magnitude among either gradient.
double gradient_rel_error(const IoUGradients& analytic, const IoUGradients& numeric);

SampleCheck check_pair(const Polygon& a, const Polygon& b, const GradcheckConfig& cfg);

struct GradcheckFailure {
  std::size_t draw = 0;
  std::vector<Point2> a;
  std::vector<Point2> b;
  double rel_error = 0.0;
};

struct GradcheckReport {
  std::size_t requested = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::vector<GradcheckFailure> failures;

  bool ok() const { return failures.empty() && checked == requested; }
};

/// Draws random convex pairs until `samples` well-conditioned ones have been
/// checked. Gives up after 100 draws per requested sample.
GradcheckReport run_gradcheck(const GradcheckConfig& cfg);

}  // namespace piou

#endif  // PIOU_GRADCHECK_HPP_
