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

#ifndef PIOU_BATCH_HPP_
#define PIOU_BATCH_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "piou/geometry.hpp"

namespace piou {

/// Widest polygon the fixed-width kernel accepts. Buffers are sized 4P.
inline constexpr std::size_t kMaxSides = 32;

/// B polygons of P vertices each, stored row-major as [B][P][2], plus a
/// [B][P] validity mask. Every row keeps at least three valid vertices.
class PolygonBatch {
 public:
  PolygonBatch() = default;
  PolygonBatch(std::size_t batch, std::size_t sides, std::vector<double> data,
               std::vector<std::uint8_t> valid = {});

  /// All polygons must have the same vertex count.
  static PolygonBatch from_polygons(std::span<const Polygon> polygons);

  std::size_t batch() const { return batch_; }
  std::size_t sides() const { return sides_; }
  std::span<const double> data() const { return data_; }
  std::span<const std::uint8_t> valid() const { return valid_; }

  const double* row(std::size_t b) const { return data_.data() + b * sides_ * 2; }
  const std::uint8_t* row_valid(std::size_t b) const { return valid_.data() + b * sides_; }
  Point2 vertex(std::size_t b, std::size_t i) const {
    return {data_[(b * sides_ + i) * 2], data_[(b * sides_ + i) * 2 + 1]};
  }
  /// Valid vertices of row b, in storage order.
  std::vector<Point2> row_points(std::size_t b) const;

 private:
  std::size_t batch_ = 0;
  std::size_t sides_ = 0;
  std::vector<double> data_;
  std::vector<std::uint8_t> valid_;
};

struct KernelOptions {
  // Fill empty slots with (0,0) and push them last by sorting on distance
  // from the origin. Only sound when no genuine overlap vertex sits at the
  // origin.
  bool paper_faithful = false;
  // Split rows across hardware threads. Output is bit-identical either way.
  bool parallel = false;
};

/// Fixed-width intermediate state of the forward pass for inspection:
/// candidate points [B][4P], their validity before truncation, and the 2P
/// points fed to the shoelace after placeholder replacement and ordering.
struct OverlapBuffer {
  std::size_t batch = 0;
  std::size_t sides = 0;
  std::vector<Point2> points;        // B * 4P
  std::vector<std::uint8_t> valid;   // B * 4P
  std::vector<Point2> kept;          // B * 2P, clockwise
  std::vector<std::size_t> count;    // distinct overlap vertices per row
};

struct IoUGradients {
  std::vector<double> value;            // B, PIoU in [0,1]
  std::vector<double> d_a;              // B*P*2, dPIoU/dA
  std::vector<double> d_b;              // B*P*2, dPIoU/dB
  std::vector<std::uint8_t> degenerate; // B
};

struct LossGradients {
  std::vector<double> loss;  // B, 1 - PIoU
  IoUGradients grads;        // gradients of the loss, not of PIoU
};

std::vector<double> piou_batch(const PolygonBatch& a, const PolygonBatch& b,
                               const KernelOptions& options = {});

OverlapBuffer overlap_buffer(const PolygonBatch& a, const PolygonBatch& b,
                             const KernelOptions& options = {});

/// Analytic gradients with the discrete structure (which points exist, their
/// order, the truncation) frozen at the forward pass. Rows whose forward pass
/// hit a degenerate configuration are flagged; their gradient drops the
/// guarded terms.
IoUGradients piou_backward(const PolygonBatch& a, const PolygonBatch& b,
                           const KernelOptions& options = {});

LossGradients piou_loss(const PolygonBatch& a, const PolygonBatch& b,
                        const KernelOptions& options = {});

/// Central differences of piou_batch, one coordinate at a time. Slow; for
/// verification only. Masked-out vertices get zero.
IoUGradients finite_diff_grad(const PolygonBatch& a, const PolygonBatch& b, double h,
                              const KernelOptions& options = {});

}  // namespace piou

#endif  // PIOU_BATCH_HPP_
