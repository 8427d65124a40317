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

#include "posekit/quantizer.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

#include "byte_io.h"
#include "posekit/error.h"

namespace posekit {
namespace {

constexpr char kMagic[4] = {'P', 'K', 'B', '1'};
constexpr double kTieSpread = 1e-12;

void CheckFinite(double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kNonFiniteSample, "sample is NaN or infinite");
  }
}

void RestoreStrictMonotonicity(std::vector<double>& edges) {
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (edges[k] > edges[k - 1]) continue;
    const double prev = edges[k - 1];
    double next = prev + kTieSpread * std::max(1.0, std::abs(prev));
    if (!(next > prev)) next = std::nextafter(prev, HUGE_VAL);
    edges[k] = next;
  }
}

}  // namespace

std::string_view FamilyName(TokenFamily family) {
  switch (family) {
    case TokenFamily::kLoc: return "loc";
    case TokenFamily::kRot: return "rot";
    case TokenFamily::kTransXy: return "trans_xy";
    case TokenFamily::kTransZ: return "trans_z";
    case TokenFamily::kSize: return "size";
  }
  return "unknown";
}

TokenFamily FamilyFromName(std::string_view name) {
  for (TokenFamily f : kAllFamilies) {
    if (FamilyName(f) == name) return f;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown token family '" + std::string(name) + "'");
}

BinTable::BinTable(TokenFamily family, BinMode mode, std::vector<double> edges)
    : family_(family), mode_(mode), edges_(std::move(edges)) {
  if (edges_.size() < 2) {
    throw Error(ErrorCode::kCorruptTable, "bin table needs at least two edges");
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (!std::isfinite(edges_[i])) {
      throw Error(ErrorCode::kCorruptTable, "non-finite bin edge", i);
    }
    if (i > 0 && !(edges_[i] > edges_[i - 1])) {
      throw Error(ErrorCode::kCorruptTable, "bin edges not strictly increasing",
                  i);
    }
  }
  if (mode_ == BinMode::kUniform) {
    const double nominal =
        (edges_.back() - edges_.front()) / static_cast<double>(n_bins());
    for (std::uint32_t i = 0; i < n_bins(); ++i) {
      if (std::abs(bin_width(i) - nominal) > 1e-9 * nominal) {
        throw Error(ErrorCode::kCorruptTable, "uniform table has unequal bins",
                    i);
      }
    }
  }
}

BinTable FitQuantileBins(TokenFamily family, std::span<const double> samples,
                         std::uint32_t n_bins) {
  if (n_bins == 0) {
    throw Error(ErrorCode::kInvalidArgument, "n_bins must be positive");
  }
  for (double x : samples) CheckFinite(x);
  if (samples.size() < n_bins) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least " + std::to_string(n_bins) + " samples for " +
                    std::string(FamilyName(family)) + ", got " +
                    std::to_string(samples.size()));
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  // Edge k sits at fractional order statistic (N - 1) * k / n_bins, computed
  // in integers so the split into whole and fractional part is exact.
  const std::uint64_t last = sorted.size() - 1;
  std::vector<double> edges(n_bins + 1);
  for (std::uint64_t k = 0; k <= n_bins; ++k) {
    const std::uint64_t scaled = last * k;
    const std::uint64_t lo = scaled / n_bins;
    const std::uint64_t rem = scaled % n_bins;
    if (rem == 0) {
      edges[k] = sorted[lo];
    } else {
      const double frac = static_cast<double>(rem) / n_bins;
      edges[k] = sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    }
  }
  RestoreStrictMonotonicity(edges);
  return BinTable(family, BinMode::kQuantile, std::move(edges));
}

BinTable UniformBins(TokenFamily family, double lo, double hi,
                     std::uint32_t n_bins) {
  if (n_bins == 0) {
    throw Error(ErrorCode::kInvalidArgument, "n_bins must be positive");
  }
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw Error(ErrorCode::kInvalidRange, "uniform bins need finite lo < hi");
  }
  std::vector<double> edges(n_bins + 1);
  const double width = (hi - lo) / n_bins;
  for (std::uint32_t k = 0; k < n_bins; ++k) edges[k] = lo + k * width;
  edges[n_bins] = hi;
  return BinTable(family, BinMode::kUniform, std::move(edges));
}

std::uint32_t EncodeValue(const BinTable& table, double x) {
  CheckFinite(x);
  const auto edges = table.edges();
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  if (it == edges.begin()) return 0;
  const auto index = static_cast<std::uint32_t>(it - edges.begin() - 1);
  return std::min(index, table.n_bins() - 1);
}

double DecodeValue(const BinTable& table, std::uint32_t index) {
  if (index >= table.n_bins()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "bin index " + std::to_string(index) + " >= " +
                    std::to_string(table.n_bins()));
  }
  const auto edges = table.edges();
  return 0.5 * (edges[index] + edges[index + 1]);
}

QuantizerSet::QuantizerSet(BinTable rot, BinTable trans_xy, BinTable trans_z,
                           BinTable size, BinTable loc, std::string version)
    : rot_(std::move(rot)),
      trans_xy_(std::move(trans_xy)),
      trans_z_(std::move(trans_z)),
      size_(std::move(size)),
      loc_(std::move(loc)),
      version_(std::move(version)) {
  for (TokenFamily f : kAllFamilies) {
    if (table(f).family() != f) {
      throw Error(ErrorCode::kInvalidArgument,
                  "table in slot " + std::string(FamilyName(f)) +
                      " has family " +
                      std::string(FamilyName(table(f).family())));
    }
  }
}

const BinTable& QuantizerSet::table(TokenFamily family) const {
  switch (family) {
    case TokenFamily::kLoc: return loc_;
    case TokenFamily::kRot: return rot_;
    case TokenFamily::kTransXy: return trans_xy_;
    case TokenFamily::kTransZ: return trans_z_;
    case TokenFamily::kSize: return size_;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown token family");
}

QuantizerSet FitQuantizerSet(const FitSamples& samples, std::uint32_t n_bins) {
  return QuantizerSet(
      UniformBins(TokenFamily::kRot, -kPi, kPi, n_bins),
      FitQuantileBins(TokenFamily::kTransXy, samples.trans_xy, n_bins),
      FitQuantileBins(TokenFamily::kTransZ, samples.trans_z, n_bins),
      FitQuantileBins(TokenFamily::kSize, samples.size, n_bins),
      UniformBins(TokenFamily::kLoc, 0.0, 1.0, n_bins));
}

PoseIndices EncodePose(const QuantizerSet& q, const Se3Pose& pose) {
  const Eigen::Vector3d& t = pose.translation();
  const EulerAngles e = QuatToEuler(pose.rotation());
  PoseIndices out;
  out.trans_x = EncodeValue(q.trans_xy(), t.x());
  out.trans_y = EncodeValue(q.trans_xy(), t.y());
  out.trans_z = EncodeValue(q.trans_z(), t.z());
  out.roll = EncodeValue(q.rot(), WrapAngle(e.roll));
  out.pitch = EncodeValue(q.rot(), WrapAngle(e.pitch));
  out.yaw = EncodeValue(q.rot(), WrapAngle(e.yaw));
  return out;
}

Se3Pose DecodePose(const QuantizerSet& q, const PoseIndices& indices) {
  const Eigen::Vector3d t(DecodeValue(q.trans_xy(), indices.trans_x),
                          DecodeValue(q.trans_xy(), indices.trans_y),
                          DecodeValue(q.trans_z(), indices.trans_z));
  const EulerAngles e{DecodeValue(q.rot(), indices.roll),
                      DecodeValue(q.rot(), indices.pitch),
                      DecodeValue(q.rot(), indices.yaw)};
  return Se3Pose(t, EulerToQuat(e));
}

SizeIndices EncodeSize(const QuantizerSet& q, const Eigen::Vector3d& dims) {
  for (int i = 0; i < 3; ++i) {
    CheckFinite(dims[i]);
    if (!(dims[i] > 0.0)) {
      throw Error(ErrorCode::kNonPositiveSize,
                  "size component " + std::to_string(i) + " is not positive");
    }
  }
  return {EncodeValue(q.size(), dims.x()), EncodeValue(q.size(), dims.y()),
          EncodeValue(q.size(), dims.z())};
}

Eigen::Vector3d DecodeSize(const QuantizerSet& q, const SizeIndices& indices) {
  return {DecodeValue(q.size(), indices[0]), DecodeValue(q.size(), indices[1]),
          DecodeValue(q.size(), indices[2])};
}

std::vector<std::uint8_t> SerializeQuantizers(const QuantizerSet& q) {
  ByteWriter w;
  w.Bytes(kMagic, sizeof(kMagic));
  w.U32(static_cast<std::uint32_t>(q.version().size()));
  w.Bytes(q.version().data(), q.version().size());
  w.U32(static_cast<std::uint32_t>(kNumFamilies));
  for (TokenFamily f : kAllFamilies) {
    const BinTable& t = q.table(f);
    w.U8(static_cast<std::uint8_t>(t.family()));
    w.U8(static_cast<std::uint8_t>(t.mode()));
    w.U32(t.n_bins());
    for (double e : t.edges()) w.F64(e);
  }
  return w.Take();
}

QuantizerSet DeserializeQuantizers(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kCorruptTable);
  char magic[4];
  r.Bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::kCorruptTable, "bad magic, expected PKB1", 0);
  }
  const std::uint32_t version_len = r.U32();
  if (version_len > 4096) {
    throw Error(ErrorCode::kCorruptTable, "version string too long", 4);
  }
  std::string version(version_len, '\0');
  r.Bytes(version.data(), version_len);
  if (version != kQuantizerFormatVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                "file version '" + version + "', reader supports '" +
                    std::string(kQuantizerFormatVersion) + "'");
  }
  const std::uint32_t count = r.U32();
  if (count != kNumFamilies) {
    throw Error(ErrorCode::kCorruptTable,
                "expected 5 tables, found " + std::to_string(count));
  }
  std::vector<std::optional<BinTable>> tables(kNumFamilies);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t table_offset = r.offset();
    const std::uint8_t family = r.U8();
    const std::uint8_t mode = r.U8();
    const std::uint32_t n_bins = r.U32();
    if (family >= kNumFamilies || mode > 1 || tables[family].has_value()) {
      throw Error(ErrorCode::kCorruptTable, "bad table header", table_offset);
    }
    if (n_bins == 0 || static_cast<std::uint64_t>(n_bins + 1ULL) * 8 >
                           r.remaining()) {
      throw Error(ErrorCode::kCorruptTable, "bad bin count", table_offset);
    }
    std::vector<double> edges(n_bins + 1);
    for (double& e : edges) e = r.F64();
    try {
      tables[family].emplace(static_cast<TokenFamily>(family),
                             static_cast<BinMode>(mode), std::move(edges));
    } catch (const Error& e) {
      throw Error(ErrorCode::kCorruptTable,
                  std::string(FamilyName(static_cast<TokenFamily>(family))) +
                      " table: " + e.message(),
                  table_offset);
    }
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kCorruptTable, "trailing bytes", r.offset());
  }
  auto take = [&](TokenFamily f) {
    return std::move(*tables[static_cast<std::size_t>(f)]);
  };
  return QuantizerSet(take(TokenFamily::kRot), take(TokenFamily::kTransXy),
                      take(TokenFamily::kTransZ), take(TokenFamily::kSize),
                      take(TokenFamily::kLoc), version);
}

void SaveQuantizers(const QuantizerSet& q, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = SerializeQuantizers(q);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
  }
}

QuantizerSet LoadQuantizers(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  }
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::kIoFailure, "read failed for " + path.string());
  }
  return DeserializeQuantizers(bytes);
}

}  // namespace posekit
