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

// Discretization tables for pose and size tokens.
//
// Rotation and box-center (loc) families use uniform bins. Translation and
// size families use equal-frequency bins fitted on a training sample, so bin
// width shrinks where data is dense. Values outside a table's support clamp
// to the boundary bins; decoding returns bin midpoints.

#ifndef POSEKIT_QUANTIZER_H_
#define POSEKIT_QUANTIZER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "posekit/geometry.h"

namespace posekit {

enum class TokenFamily : std::uint8_t {
  kLoc = 0,
  kRot = 1,
  kTransXy = 2,
  kTransZ = 3,
  kSize = 4,
};
inline constexpr std::size_t kNumFamilies = 5;
inline constexpr std::array<TokenFamily, kNumFamilies> kAllFamilies = {
    TokenFamily::kLoc, TokenFamily::kRot, TokenFamily::kTransXy,
    TokenFamily::kTransZ, TokenFamily::kSize};

std::string_view FamilyName(TokenFamily family);
// Parses "loc", "rot", "trans_xy", "trans_z", "size".
TokenFamily FamilyFromName(std::string_view name);

enum class BinMode : std::uint8_t { kUniform = 0, kQuantile = 1 };

inline constexpr std::uint32_t kDefaultBins = 1024;

// Sorted bin edges for one token family. Construction checks that edges are
// finite, strictly increasing, at least two, and (uniform mode) equally
// spaced within 1e-9 relative; violations throw CorruptTable.
class BinTable {
 public:
  BinTable(TokenFamily family, BinMode mode, std::vector<double> edges);

  TokenFamily family() const noexcept { return family_; }
  BinMode mode() const noexcept { return mode_; }
  std::uint32_t n_bins() const noexcept {
    return static_cast<std::uint32_t>(edges_.size() - 1);
  }
  std::span<const double> edges() const noexcept { return edges_; }
  double bin_width(std::uint32_t i) const { return edges_[i + 1] - edges_[i]; }

  friend bool operator==(const BinTable&, const BinTable&) = default;

 private:
  TokenFamily family_;
  BinMode mode_;
  std::vector<double> edges_;
};

// Equal-frequency edges at the empirical k/n_bins quantiles (linear
// interpolation between order statistics). Tied edges are re-spread by
// 1e-12 * max(1, |edge|) so the table stays strictly increasing.
BinTable FitQuantileBins(TokenFamily family, std::span<const double> samples,
                         std::uint32_t n_bins);

BinTable UniformBins(TokenFamily family, double lo, double hi,
                     std::uint32_t n_bins);

// Index i with edges[i] <= x < edges[i+1], clamped to [0, n_bins).
std::uint32_t EncodeValue(const BinTable& table, double x);
// Midpoint of bin i.
double DecodeValue(const BinTable& table, std::uint32_t index);

inline constexpr std::string_view kQuantizerFormatVersion = "posekit-bins/1";

class QuantizerSet {
 public:
  QuantizerSet(BinTable rot, BinTable trans_xy, BinTable trans_z, BinTable size,
               BinTable loc,
               std::string version = std::string(kQuantizerFormatVersion));

  const BinTable& rot() const noexcept { return rot_; }
  const BinTable& trans_xy() const noexcept { return trans_xy_; }
  const BinTable& trans_z() const noexcept { return trans_z_; }
  const BinTable& size() const noexcept { return size_; }
  const BinTable& loc() const noexcept { return loc_; }
  const BinTable& table(TokenFamily family) const;
  const std::string& version() const noexcept { return version_; }

  friend bool operator==(const QuantizerSet&, const QuantizerSet&) = default;

 private:
  BinTable rot_, trans_xy_, trans_z_, size_, loc_;
  std::string version_;
};

// Training samples for the three fitted families. x and y translations are
// pooled into one trans_xy sample.
struct FitSamples {
  std::vector<double> trans_xy;
  std::vector<double> trans_z;
  std::vector<double> size;
};

// Fits trans_xy/trans_z/size quantile tables and builds uniform rot
// ([-pi, pi)) and loc ([0, 1)) tables, all with n_bins bins.
QuantizerSet FitQuantizerSet(const FitSamples& samples,
                             std::uint32_t n_bins = kDefaultBins);

struct PoseIndices {
  std::uint32_t trans_x = 0;
  std::uint32_t trans_y = 0;
  std::uint32_t trans_z = 0;
  std::uint32_t roll = 0;
  std::uint32_t pitch = 0;
  std::uint32_t yaw = 0;

  friend bool operator==(const PoseIndices&, const PoseIndices&) = default;
};

using SizeIndices = std::array<std::uint32_t, 3>;

PoseIndices EncodePose(const QuantizerSet& q, const Se3Pose& pose);
Se3Pose DecodePose(const QuantizerSet& q, const PoseIndices& indices);

// Throws NonPositiveSize unless every component is > 0.
SizeIndices EncodeSize(const QuantizerSet& q, const Eigen::Vector3d& dims);
Eigen::Vector3d DecodeSize(const QuantizerSet& q, const SizeIndices& indices);

// Binary layout, little-endian:
//   "PKB1" | u32 version length | version bytes | u32 table count |
//   per table: u8 family | u8 mode | u32 n_bins | (n_bins + 1) x f64 edges
void SaveQuantizers(const QuantizerSet& q, const std::filesystem::path& path);
QuantizerSet LoadQuantizers(const std::filesystem::path& path);

std::vector<std::uint8_t> SerializeQuantizers(const QuantizerSet& q);
QuantizerSet DeserializeQuantizers(std::span<const std::uint8_t> bytes);

}  // namespace posekit

#endif  // POSEKIT_QUANTIZER_H_
