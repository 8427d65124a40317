// Copyright 2026 The posekit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Geometric prior fields and the training-time modality masking operator.
//
// Depth is never normalized: channel 0 of a depth stack carries metric
// depth bit-for-bit, channel 1 the validity mask.
//
// Patch layout ("posekit-patch/1"): rows run row-major over the patch grid;
// within a row, values run row-major over the patch's pixels with channels
// last.

#ifndef POSEKIT_PRIORS_H_
#define POSEKIT_PRIORS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "posekit/field.h"

namespace posekit {

// Metric depth (meters, 0 where invalid) plus a {0,1} validity mask.
class DepthMap {
 public:
  DepthMap() = default;
  // Throws InvalidArgument on shape mismatch, non-binary mask, negative
  // values, non-finite valid values, or nonzero values under mask 0.
  DepthMap(DenseField values, std::vector<std::uint8_t> mask);
  // Mask inferred as value > 0; non-finite values become invalid.
  static DepthMap FromValues(DenseField values);

  int height() const noexcept { return values_.height(); }
  int width() const noexcept { return values_.width(); }
  const DenseField& values() const noexcept { return values_; }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  std::size_t valid_count() const;

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  DenseField values_;
  std::vector<std::uint8_t> mask_;
};

struct PatchGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  int patch_size = 0;
  std::vector<double> values;

  int grid_rows() const noexcept { return height / patch_size; }
  int grid_cols() const noexcept { return width / patch_size; }
  std::size_t patch_count() const noexcept {
    return static_cast<std::size_t>(grid_rows()) * grid_cols();
  }
  std::size_t patch_dim() const noexcept {
    return static_cast<std::size_t>(patch_size) * patch_size * channels;
  }
  std::span<const double> patch(std::size_t i) const {
    return std::span<const double>(values).subspan(i * patch_dim(),
                                                   patch_dim());
  }

  friend bool operator==(const PatchGrid&, const PatchGrid&) = default;
};

struct MaskPolicy {
  double p_drop_ray = 0.0;
  double p_drop_depth = 0.0;
  double sparse_keep_fraction = 1.0;
  std::uint64_t seed = 0;

  // Throws InvalidArgument unless every probability is in [0, 1].
  void Validate() const;
};

// H x W x 2 field: [depth, mask].
DenseField StackDepthMask(const DepthMap& d);

// Throws NonDivisibleShape unless H and W are multiples of patch_size.
PatchGrid Patchify(const DenseField& field, int patch_size);
DenseField Unpatchify(const PatchGrid& grid);

struct MaskedPriors {
  std::optional<DenseField> ray;
  std::optional<DepthMap> depth;
  bool ray_dropped = false;
  bool depth_dropped = false;
};

// Drops the raymap with probability p_drop_ray and, independently, the depth
// map with probability p_drop_depth. A dropped field keeps its shape and is
// all zeros (depth mask included). Decisions depend only on
// (policy.seed, stream_index).
MaskedPriors MaskModality(std::optional<DenseField> ray,
                          std::optional<DepthMap> depth,
                          const MaskPolicy& policy, std::uint64_t stream_index);

// Keeps exactly round(keep_fraction * valid_count) of the valid pixels,
// chosen uniformly at random under (seed, stream_index).
DepthMap SparseDepthSample(const DepthMap& d, double keep_fraction,
                           std::uint64_t seed, std::uint64_t stream_index);

enum class PriorKind : std::uint8_t { kRaymap = 0, kDepthMask = 1 };

struct PriorField {
  PriorKind kind = PriorKind::kRaymap;
  bool dropped = false;
  PatchGrid grid;

  friend bool operator==(const PriorField&, const PriorField&) = default;
};

// One example's prior stack. Binary layout, little-endian:
//   "PKP1" | u32 field count | per field: u8 kind | u8 dropped |
//   u32 height | u32 width | u32 channels | u32 patch |
//   patch_count * patch_dim x f32 values
std::vector<std::uint8_t> EncodePriorBlock(std::span<const PriorField> fields);
// Parses one block starting at `bytes`; `consumed` receives its length.
std::vector<PriorField> DecodePriorBlock(std::span<const std::uint8_t> bytes,
                                         std::size_t* consumed = nullptr);

}  // namespace posekit

#endif  // POSEKIT_PRIORS_H_
