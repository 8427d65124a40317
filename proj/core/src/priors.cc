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

#include "posekit/priors.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>
#include <utility>

#include "byte_io.h"
#include "posekit/counter_rng.h"
#include "posekit/error.h"

namespace posekit {
namespace {

constexpr char kPriorMagic[4] = {'P', 'K', 'P', '1'};

// Randomness domains under one (seed, stream_index) key.
constexpr std::uint64_t kDomainRayDrop = 0;
constexpr std::uint64_t kDomainDepthDrop = 1;
constexpr std::uint64_t kDomainSparse = 2;

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

DepthMap::DepthMap(DenseField values, std::vector<std::uint8_t> mask)
    : values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.channels() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "depth map must be single-channel");
  }
  if (mask_.size() != values_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "depth mask shape mismatch");
  }
  const auto v = values_.values();
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i] > 1) {
      throw Error(ErrorCode::kInvalidArgument, "depth mask must be 0 or 1", i);
    }
    if (mask_[i] == 1 && !(std::isfinite(v[i]) && v[i] >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "valid depth must be finite and non-negative", i);
    }
    if (mask_[i] == 0 && v[i] != 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "invalid depth pixel must be 0",
                  i);
    }
  }
}

DepthMap DepthMap::FromValues(DenseField values) {
  std::vector<std::uint8_t> mask(values.size(), 0);
  auto v = values.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i]) && v[i] > 0.0) {
      mask[i] = 1;
    } else {
      v[i] = 0.0;
    }
  }
  return DepthMap(std::move(values), std::move(mask));
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

void MaskPolicy::Validate() const {
  if (!IsProbability(p_drop_ray) || !IsProbability(p_drop_depth) ||
      !IsProbability(sparse_keep_fraction)) {
    throw Error(ErrorCode::kInvalidArgument,
                "mask policy probabilities must lie in [0, 1]");
  }
}

DenseField StackDepthMask(const DepthMap& d) {
  DenseField out(d.height(), d.width(), 2);
  const auto in = d.values().values();
  auto dst = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    dst[2 * i] = in[i];
    dst[2 * i + 1] = d.mask()[i];
  }
  return out;
}

PatchGrid Patchify(const DenseField& field, int patch_size) {
  if (patch_size <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "patch size must be positive");
  }
  if (field.height() % patch_size != 0 || field.width() % patch_size != 0) {
    throw Error(ErrorCode::kNonDivisibleShape,
                "field of height " + std::to_string(field.height()) +
                    " and width " + std::to_string(field.width()) +
                    " is not divisible by patch size " +
                    std::to_string(patch_size));
  }
  PatchGrid grid;
  grid.height = field.height();
  grid.width = field.width();
  grid.channels = field.channels();
  grid.patch_size = patch_size;
  grid.values.reserve(field.size());
  const std::size_t run = static_cast<std::size_t>(patch_size) * grid.channels;
  const auto src = field.values();
  for (int gr = 0; gr < grid.grid_rows(); ++gr) {
    for (int gc = 0; gc < grid.grid_cols(); ++gc) {
      for (int dy = 0; dy < patch_size; ++dy) {
        const auto first =
            src.begin() + static_cast<std::ptrdiff_t>(field.offset(
                              gr * patch_size + dy, gc * patch_size));
        grid.values.insert(grid.values.end(), first,
                           first + static_cast<std::ptrdiff_t>(run));
      }
    }
  }
  return grid;
}

DenseField Unpatchify(const PatchGrid& grid) {
  if (grid.patch_size <= 0 || grid.height % grid.patch_size != 0 ||
      grid.width % grid.patch_size != 0 ||
      grid.values.size() != grid.patch_count() * grid.patch_dim()) {
    throw Error(ErrorCode::kNonDivisibleShape, "inconsistent patch grid");
  }
  DenseField field(grid.height, grid.width, grid.channels);
  const std::size_t run =
      static_cast<std::size_t>(grid.patch_size) * grid.channels;
  auto dst = field.values();
  std::size_t pos = 0;
  for (int gr = 0; gr < grid.grid_rows(); ++gr) {
    for (int gc = 0; gc < grid.grid_cols(); ++gc) {
      for (int dy = 0; dy < grid.patch_size; ++dy) {
        std::copy_n(grid.values.begin() + static_cast<std::ptrdiff_t>(pos), run,
                    dst.begin() + static_cast<std::ptrdiff_t>(field.offset(
                                      gr * grid.patch_size + dy,
                                      gc * grid.patch_size)));
        pos += run;
      }
    }
  }
  return field;
}

MaskedPriors MaskModality(std::optional<DenseField> ray,
                          std::optional<DepthMap> depth,
                          const MaskPolicy& policy,
                          std::uint64_t stream_index) {
  policy.Validate();
  MaskedPriors out;
  const bool drop_ray =
      CounterRng(policy.seed, stream_index, kDomainRayDrop).Uniform() <
      policy.p_drop_ray;
  const bool drop_depth =
      CounterRng(policy.seed, stream_index, kDomainDepthDrop).Uniform() <
      policy.p_drop_depth;
  if (ray && drop_ray) {
    std::fill(ray->values().begin(), ray->values().end(), 0.0);
    out.ray_dropped = true;
  }
  if (depth && drop_depth) {
    depth = DepthMap(DenseField(depth->height(), depth->width(), 1),
                     std::vector<std::uint8_t>(depth->mask().size(), 0));
    out.depth_dropped = true;
  }
  out.ray = std::move(ray);
  out.depth = std::move(depth);
  return out;
}

DepthMap SparseDepthSample(const DepthMap& d, double keep_fraction,
                           std::uint64_t seed, std::uint64_t stream_index) {
  if (!IsProbability(keep_fraction)) {
    throw Error(ErrorCode::kInvalidArgument,
                "keep fraction must lie in [0, 1]");
  }
  std::vector<std::size_t> valid;
  valid.reserve(d.mask().size());
  for (std::size_t i = 0; i < d.mask().size(); ++i) {
    if (d.mask()[i]) valid.push_back(i);
  }
  const auto keep = static_cast<std::size_t>(
      std::llround(keep_fraction * static_cast<double>(valid.size())));
  // Partial Fisher-Yates: the first `keep` slots become the kept subset.
  CounterRng rng(seed, stream_index, kDomainSparse);
  for (std::size_t i = 0; i < keep && i + 1 < valid.size(); ++i) {
    const std::size_t j = i + rng.Below(valid.size() - i);
    std::swap(valid[i], valid[j]);
  }
  DenseField values(d.height(), d.width(), 1);
  std::vector<std::uint8_t> mask(d.mask().size(), 0);
  const auto src = d.values().values();
  auto dst = values.values();
  for (std::size_t i = 0; i < keep; ++i) {
    dst[valid[i]] = src[valid[i]];
    mask[valid[i]] = 1;
  }
  return DepthMap(std::move(values), std::move(mask));
}

std::vector<std::uint8_t> EncodePriorBlock(std::span<const PriorField> fields) {
  ByteWriter w;
  w.Bytes(kPriorMagic, sizeof(kPriorMagic));
  w.U32(static_cast<std::uint32_t>(fields.size()));
  for (const PriorField& f : fields) {
    w.U8(static_cast<std::uint8_t>(f.kind));
    w.U8(f.dropped ? 1 : 0);
    w.U32(static_cast<std::uint32_t>(f.grid.height));
    w.U32(static_cast<std::uint32_t>(f.grid.width));
    w.U32(static_cast<std::uint32_t>(f.grid.channels));
    w.U32(static_cast<std::uint32_t>(f.grid.patch_size));
    for (double v : f.grid.values) w.F32(static_cast<float>(v));
  }
  return w.Take();
}

std::vector<PriorField> DecodePriorBlock(std::span<const std::uint8_t> bytes,
                                         std::size_t* consumed) {
  ByteReader r(bytes, ErrorCode::kIoFailure);
  char magic[4];
  r.Bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kPriorMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::kIoFailure, "bad prior block magic", 0);
  }
  const std::uint32_t count = r.U32();
  std::vector<PriorField> fields;
  for (std::uint32_t i = 0; i < count; ++i) {
    PriorField f;
    const std::uint8_t kind = r.U8();
    if (kind > 1) throw Error(ErrorCode::kIoFailure, "bad prior kind", r.offset());
    f.kind = static_cast<PriorKind>(kind);
    f.dropped = r.U8() != 0;
    f.grid.height = static_cast<int>(r.U32());
    f.grid.width = static_cast<int>(r.U32());
    f.grid.channels = static_cast<int>(r.U32());
    f.grid.patch_size = static_cast<int>(r.U32());
    if (f.grid.patch_size <= 0 || f.grid.height % f.grid.patch_size != 0 ||
        f.grid.width % f.grid.patch_size != 0) {
      throw Error(ErrorCode::kIoFailure, "bad prior grid header", r.offset());
    }
    const std::size_t n = f.grid.patch_count() * f.grid.patch_dim();
    if (n * 4 > r.remaining()) {
      throw Error(ErrorCode::kIoFailure, "truncated prior block", r.offset());
    }
    f.grid.values.resize(n);
    for (double& v : f.grid.values) v = r.F32();
    fields.push_back(std::move(f));
  }
  if (consumed) *consumed = r.offset();
  return fields;
}

}  // namespace posekit
