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

#ifndef PIOU_RASTER_HPP_
#define PIOU_RASTER_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "piou/geometry.hpp"

namespace piou {

struct RasterConfig {
  int resolution = 1024;  // pixels per axis
  double padding = 0.05;  // fraction of the joint bounding box added per side

  void validate() const;
};

/// Axis-aligned pixel grid; pixel (col, row) has its center at
/// (x0 + (col + 0.5) * dx, y0 + (row + 0.5) * dy).
struct RasterGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  int resolution = 0;

  static RasterGrid covering(const Polygon& a, const Polygon& b, const RasterConfig& cfg);
};

/// Row-major resolution x resolution occupancy mask, 1 where the pixel
/// center is inside the polygon (even-odd rule, half-open at the edges).
std::vector<std::uint8_t> rasterize(const Polygon& poly, const RasterGrid& grid);

/// Pixel-count IoU of two polygons on their shared padded grid. Works for
/// any simple polygon; vertex order does not matter as long as it traces
/// the boundary.
double raster_iou(const Polygon& a, const Polygon& b, const RasterConfig& cfg = {});

}  // namespace piou

#endif  // PIOU_RASTER_HPP_
