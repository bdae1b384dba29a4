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

#include "piou/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "piou/error.hpp"

namespace piou {

void RasterConfig::validate() const {
  if (resolution < 16) {
    throw Error(ErrorCode::kInvalidArgument, "raster resolution must be at least 16, got " +
                                                 std::to_string(resolution));
  }
  if (!(padding >= 0.0) || !std::isfinite(padding)) {
    throw Error(ErrorCode::kInvalidArgument, "raster padding must be a finite non-negative fraction");
  }
}

RasterGrid RasterGrid::covering(const Polygon& a, const Polygon& b, const RasterConfig& cfg) {
  cfg.validate();
  double lo_x = a[0].x, hi_x = a[0].x, lo_y = a[0].y, hi_y = a[0].y;
  for (const Polygon* p : {&a, &b}) {
    for (const Point2& v : p->vertices()) {
      lo_x = std::min(lo_x, v.x);
      hi_x = std::max(hi_x, v.x);
      lo_y = std::min(lo_y, v.y);
      hi_y = std::max(hi_y, v.y);
    }
  }
  const double w = hi_x - lo_x;
  const double h = hi_y - lo_y;
  if (!(w > 0.0) || !(h > 0.0)) {
    throw Error(ErrorCode::kDegenerate, "joint bounding box has zero area");
  }
  RasterGrid g;
  g.resolution = cfg.resolution;
  g.x0 = lo_x - cfg.padding * w;
  g.y0 = lo_y - cfg.padding * h;
  g.dx = w * (1.0 + 2.0 * cfg.padding) / cfg.resolution;
  g.dy = h * (1.0 + 2.0 * cfg.padding) / cfg.resolution;
  return g;
}

std::vector<std::uint8_t> rasterize(const Polygon& poly, const RasterGrid& grid) {
  const int res = grid.resolution;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(res) * res, 0);
  const auto v = poly.vertices();
  const std::size_t n = v.size();
  std::vector<double> xs;
  xs.reserve(n);
  for (int row = 0; row < res; ++row) {
    const double y = grid.y0 + (row + 0.5) * grid.dy;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 p = v[i];
      const Point2 q = v[(i + 1) % n];
      // Half-open in y so a vertex on the scanline is counted once.
      if ((p.y <= y) != (q.y <= y)) xs.push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
    }
    std::sort(xs.begin(), xs.end());
    std::uint8_t* line = mask.data() + static_cast<std::size_t>(row) * res;
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel centers with xs[k] <= x < xs[k+1].
      const int c0 = std::max(0, static_cast<int>(std::ceil((xs[k] - grid.x0) / grid.dx - 0.5)));
      const int c1 = std::min(res, static_cast<int>(std::ceil((xs[k + 1] - grid.x0) / grid.dx - 0.5)));
      if (c1 > c0) std::fill(line + c0, line + c1, std::uint8_t{1});
    }
  }
  return mask;
}

double raster_iou(const Polygon& a, const Polygon& b, const RasterConfig& cfg) {
  const RasterGrid grid = RasterGrid::covering(a, b, cfg);
  const std::vector<std::uint8_t> ma = rasterize(a, grid);
  const std::vector<std::uint8_t> mb = rasterize(b, grid);
  std::size_t both = 0;
  std::size_t either = 0;
  for (std::size_t k = 0; k < ma.size(); ++k) {
    both += ma[k] & mb[k];
    either += ma[k] | mb[k];
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace piou
