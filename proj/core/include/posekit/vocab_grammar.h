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

// Extended token vocabulary and the structured sequence grammar.
//
// ID layout (grammar version "posekit-grammar/1"):
//   [loc][rot][trans_xy][trans_z][size] value families, in that order, then
//   the six structural tokens <obj> <traj> <wp> <sep> <eos> <text>.
//
// Grounding tuple:
//   <obj> <text> len_hi len_lo byte* loc_u loc_v tx ty tz roll pitch yaw
//   [sx sy sz] <sep>
// The category is carried as raw UTF-8 bytes. The 16-bit length and each
// byte are loc-family tokens whose index is the byte value, so the loc
// family must hold at least 256 bins.
//
// Trajectory:
//   <traj> (<wp> tx ty tz roll pitch yaw [gripper])+ <eos>
// The optional gripper opening reuses the loc family over [0, 1) and must be
// present on every waypoint or on none.

#ifndef POSEKIT_VOCAB_GRAMMAR_H_
#define POSEKIT_VOCAB_GRAMMAR_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "posekit/geometry.h"
#include "posekit/quantizer.h"

namespace posekit {

inline constexpr std::string_view kGrammarVersion = "posekit-grammar/1";

using TokenId = std::uint32_t;

enum class Structural : std::uint8_t {
  kObj = 0,
  kTraj = 1,
  kWp = 2,
  kSep = 3,
  kEos = 4,
  kText = 5,
};
inline constexpr std::size_t kNumStructural = 6;

std::string_view StructuralName(Structural s);

struct VocabConfig {
  // Indexed by TokenFamily.
  std::array<std::uint32_t, kNumFamilies> family_sizes = {
      kDefaultBins, kDefaultBins, kDefaultBins, kDefaultBins, kDefaultBins};

  // Sizes matching the bin counts of a quantizer set.
  static VocabConfig FromQuantizers(const QuantizerSet& q);
};

class Vocab {
 public:
  struct Decoded {
    enum class Kind { kFamily, kStructural } kind;
    TokenFamily family = TokenFamily::kLoc;
    std::uint32_t index = 0;
    Structural structural = Structural::kObj;
  };

  TokenId offset(TokenFamily f) const { return offsets_[Slot(f)]; }
  std::uint32_t family_size(TokenFamily f) const { return sizes_[Slot(f)]; }
  TokenId id(TokenFamily f, std::uint32_t index) const;
  TokenId id(Structural s) const {
    return structural_base_ + static_cast<TokenId>(s);
  }
  std::uint32_t size() const noexcept {
    return structural_base_ + static_cast<std::uint32_t>(kNumStructural);
  }
  // Throws UnknownToken for ids >= size().
  Decoded Classify(TokenId id) const;

  // True when every family size equals the matching table's bin count.
  bool CompatibleWith(const QuantizerSet& q) const;

  friend bool operator==(const Vocab&, const Vocab&) = default;

 private:
  friend Vocab BuildVocab(const VocabConfig& config);
  static std::size_t Slot(TokenFamily f) { return static_cast<std::size_t>(f); }

  std::array<TokenId, kNumFamilies> offsets_{};
  std::array<std::uint32_t, kNumFamilies> sizes_{};
  TokenId structural_base_ = 0;
};

Vocab BuildVocab(const VocabConfig& config = {});

struct PoseTuple {
  std::string category;
  Eigen::Vector2d box_center = Eigen::Vector2d::Zero();  // normalized [0,1)
  Se3Pose pose;
  std::optional<Eigen::Vector3d> size;
};

struct Trajectory {
  std::vector<Se3Pose> waypoints;
  std::optional<std::vector<double>> gripper;  // per waypoint, [0, 1]
};

using SequenceItem = std::variant<PoseTuple, Trajectory>;

// Throws InvariantViolation when a tuple or trajectory breaks its invariants.
void CheckInvariants(const PoseTuple& t);
void CheckInvariants(const Trajectory& t);

std::vector<TokenId> SerializeTuple(const PoseTuple& t, const Vocab& v,
                                    const QuantizerSet& q);
std::vector<TokenId> SerializeTrajectory(const Trajectory& tr, const Vocab& v,
                                         const QuantizerSet& q);

// Total on arbitrary input: returns the decoded items or throws Error with
// code UnknownToken, MalformedStructure or Truncated and the offending token
// index as position.
std::vector<SequenceItem> ParseSequence(std::span<const TokenId> ids,
                                        const Vocab& v, const QuantizerSet& q);

// Token counts implied by the grammar.
std::size_t TupleTokenCount(std::size_t category_bytes, bool has_size);
std::size_t TrajectoryTokenCount(std::size_t waypoints, bool has_gripper);

// On-disk token streams: kBinary is an array of u32 little-endian ids,
// kText one decimal id per line.
enum class TokenFormat : std::uint8_t { kBinary, kText };

std::string FormatTokens(std::span<const TokenId> ids, TokenFormat format);
// Throws Truncated when binary data is not a whole number of ids and
// UnknownToken for a text line that is not a decimal u32; the position is
// the index of the offending id.
std::vector<TokenId> ParseTokens(std::string_view data, TokenFormat format);

}  // namespace posekit

#endif  // POSEKIT_VOCAB_GRAMMAR_H_
