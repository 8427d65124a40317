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

#include "posekit/vocab_grammar.h"

#include <charconv>
#include <cmath>
#include <string>

#include "posekit/error.h"

namespace posekit {
namespace {

constexpr std::uint32_t kByteValues = 256;
constexpr std::size_t kMaxCategoryBytes = 0xFFFF;

void RequireCompatible(const Vocab& v, const QuantizerSet& q) {
  if (!v.CompatibleWith(q)) {
    throw Error(ErrorCode::kInvalidArgument,
                "vocab family sizes do not match quantizer bin counts");
  }
  if (v.family_size(TokenFamily::kLoc) < kByteValues) {
    throw Error(ErrorCode::kInvalidArgument,
                "loc family needs >= 256 bins to carry category bytes");
  }
}

void AppendPose(const PoseIndices& p, const Vocab& v,
                std::vector<TokenId>& out) {
  out.push_back(v.id(TokenFamily::kTransXy, p.trans_x));
  out.push_back(v.id(TokenFamily::kTransXy, p.trans_y));
  out.push_back(v.id(TokenFamily::kTransZ, p.trans_z));
  out.push_back(v.id(TokenFamily::kRot, p.roll));
  out.push_back(v.id(TokenFamily::kRot, p.pitch));
  out.push_back(v.id(TokenFamily::kRot, p.yaw));
}

std::string DescribeToken(const Vocab::Decoded& d) {
  if (d.kind == Vocab::Decoded::Kind::kStructural) {
    return std::string(StructuralName(d.structural));
  }
  return "<" + std::string(FamilyName(d.family)) + ":" +
         std::to_string(d.index) + ">";
}

// Walks a token stream, reporting grammar errors at the offending index.
class Cursor {
 public:
  Cursor(std::span<const TokenId> ids, const Vocab& v) : ids_(ids), v_(v) {}

  bool AtEnd() const noexcept { return pos_ >= ids_.size(); }
  std::size_t pos() const noexcept { return pos_; }

  Vocab::Decoded Peek() const {
    if (AtEnd()) {
      throw Error(ErrorCode::kTruncated, "sequence ends mid-structure", pos_);
    }
    if (ids_[pos_] >= v_.size()) {
      throw Error(ErrorCode::kUnknownToken,
                  "token id " + std::to_string(ids_[pos_]) +
                      " outside vocabulary of size " + std::to_string(v_.size()),
                  pos_);
    }
    return v_.Classify(ids_[pos_]);
  }

  bool PeekIs(Structural s) const {
    const auto d = Peek();
    return d.kind == Vocab::Decoded::Kind::kStructural && d.structural == s;
  }
  bool PeekIs(TokenFamily f) const {
    const auto d = Peek();
    return d.kind == Vocab::Decoded::Kind::kFamily && d.family == f;
  }

  void Expect(Structural s) {
    const auto d = Peek();
    if (d.kind != Vocab::Decoded::Kind::kStructural || d.structural != s) {
      Fail("expected " + std::string(StructuralName(s)) + ", found " +
           DescribeToken(d));
    }
    ++pos_;
  }

  std::uint32_t Expect(TokenFamily f) {
    const auto d = Peek();
    if (d.kind != Vocab::Decoded::Kind::kFamily || d.family != f) {
      Fail("expected <" + std::string(FamilyName(f)) + "> token, found " +
           DescribeToken(d));
    }
    ++pos_;
    return d.index;
  }

  std::uint8_t ExpectByte() {
    const std::size_t at = pos_;
    const std::uint32_t index = Expect(TokenFamily::kLoc);
    if (index >= kByteValues) {
      throw Error(ErrorCode::kMalformedStructure,
                  "byte token value " + std::to_string(index) + " exceeds 255",
                  at);
    }
    return static_cast<std::uint8_t>(index);
  }

  PoseIndices ExpectPose() {
    PoseIndices p;
    p.trans_x = Expect(TokenFamily::kTransXy);
    p.trans_y = Expect(TokenFamily::kTransXy);
    p.trans_z = Expect(TokenFamily::kTransZ);
    p.roll = Expect(TokenFamily::kRot);
    p.pitch = Expect(TokenFamily::kRot);
    p.yaw = Expect(TokenFamily::kRot);
    return p;
  }

  [[noreturn]] void Fail(const std::string& message) const {
    throw Error(ErrorCode::kMalformedStructure, message, pos_);
  }

 private:
  std::span<const TokenId> ids_;
  const Vocab& v_;
  std::size_t pos_ = 0;
};

PoseTuple ParseTuple(Cursor& c, const QuantizerSet& q) {
  c.Expect(Structural::kObj);
  c.Expect(Structural::kText);
  const std::size_t hi = c.ExpectByte();
  const std::size_t lo = c.ExpectByte();
  const std::size_t length = (hi << 8) | lo;
  PoseTuple t;
  t.category.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    t.category.push_back(static_cast<char>(c.ExpectByte()));
  }
  const std::uint32_t loc_u = c.Expect(TokenFamily::kLoc);
  const std::uint32_t loc_v = c.Expect(TokenFamily::kLoc);
  t.box_center = {DecodeValue(q.loc(), loc_u), DecodeValue(q.loc(), loc_v)};
  t.pose = DecodePose(q, c.ExpectPose());
  if (c.PeekIs(TokenFamily::kSize)) {
    SizeIndices s;
    for (auto& idx : s) idx = c.Expect(TokenFamily::kSize);
    t.size = DecodeSize(q, s);
  }
  c.Expect(Structural::kSep);
  return t;
}

Trajectory ParseTrajectory(Cursor& c, const QuantizerSet& q) {
  c.Expect(Structural::kTraj);
  Trajectory tr;
  std::optional<bool> has_gripper;
  std::vector<double> gripper;
  do {
    c.Expect(Structural::kWp);
    tr.waypoints.push_back(DecodePose(q, c.ExpectPose()));
    const bool this_has_gripper = c.PeekIs(TokenFamily::kLoc);
    if (has_gripper && *has_gripper != this_has_gripper) {
      c.Fail("gripper token present on some waypoints but not others");
    }
    has_gripper = this_has_gripper;
    if (this_has_gripper) {
      gripper.push_back(DecodeValue(q.loc(), c.Expect(TokenFamily::kLoc)));
    }
    if (!c.PeekIs(Structural::kWp) && !c.PeekIs(Structural::kEos)) {
      c.Fail("expected <wp> or <eos> after waypoint, found " +
             DescribeToken(c.Peek()));
    }
  } while (!c.PeekIs(Structural::kEos));
  c.Expect(Structural::kEos);
  if (*has_gripper) tr.gripper = std::move(gripper);
  return tr;
}

}  // namespace

std::string_view StructuralName(Structural s) {
  switch (s) {
    case Structural::kObj: return "<obj>";
    case Structural::kTraj: return "<traj>";
    case Structural::kWp: return "<wp>";
    case Structural::kSep: return "<sep>";
    case Structural::kEos: return "<eos>";
    case Structural::kText: return "<text>";
  }
  return "<?>";
}

VocabConfig VocabConfig::FromQuantizers(const QuantizerSet& q) {
  VocabConfig c;
  for (TokenFamily f : kAllFamilies) {
    c.family_sizes[static_cast<std::size_t>(f)] = q.table(f).n_bins();
  }
  return c;
}

Vocab BuildVocab(const VocabConfig& config) {
  Vocab v;
  TokenId next = 0;
  for (TokenFamily f : kAllFamilies) {
    const std::uint32_t n = config.family_sizes[Vocab::Slot(f)];
    if (n == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "family " + std::string(FamilyName(f)) + " has zero size");
    }
    v.offsets_[Vocab::Slot(f)] = next;
    v.sizes_[Vocab::Slot(f)] = n;
    next += n;
  }
  v.structural_base_ = next;
  return v;
}

TokenId Vocab::id(TokenFamily f, std::uint32_t index) const {
  if (index >= family_size(f)) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "index " + std::to_string(index) + " outside family " +
                    std::string(FamilyName(f)));
  }
  return offset(f) + index;
}

Vocab::Decoded Vocab::Classify(TokenId id) const {
  if (id >= size()) {
    throw Error(ErrorCode::kUnknownToken,
                "token id " + std::to_string(id) + " outside vocabulary");
  }
  Decoded d;
  if (id >= structural_base_) {
    d.kind = Decoded::Kind::kStructural;
    d.structural = static_cast<Structural>(id - structural_base_);
    return d;
  }
  d.kind = Decoded::Kind::kFamily;
  for (TokenFamily f : kAllFamilies) {
    const TokenId start = offsets_[Slot(f)];
    if (id >= start && id < start + sizes_[Slot(f)]) {
      d.family = f;
      d.index = id - start;
      break;
    }
  }
  return d;
}

bool Vocab::CompatibleWith(const QuantizerSet& q) const {
  for (TokenFamily f : kAllFamilies) {
    if (family_size(f) != q.table(f).n_bins()) return false;
  }
  return true;
}

void CheckInvariants(const PoseTuple& t) {
  for (int i = 0; i < 2; ++i) {
    if (!(t.box_center[i] >= 0.0 && t.box_center[i] < 1.0)) {
      throw Error(ErrorCode::kInvariantViolation,
                  "box center component outside [0, 1)");
    }
  }
  if (t.size) {
    for (int i = 0; i < 3; ++i) {
      if (!((*t.size)[i] > 0.0) || !std::isfinite((*t.size)[i])) {
        throw Error(ErrorCode::kNonPositiveSize,
                    "size component " + std::to_string(i) +
                        " is not a positive finite number");
      }
    }
  }
  if (t.category.size() > kMaxCategoryBytes) {
    throw Error(ErrorCode::kInvariantViolation,
                "category longer than 65535 bytes");
  }
}

void CheckInvariants(const Trajectory& t) {
  if (t.waypoints.empty()) {
    throw Error(ErrorCode::kInvariantViolation,
                "trajectory needs at least one waypoint");
  }
  if (t.gripper) {
    if (t.gripper->size() != t.waypoints.size()) {
      throw Error(ErrorCode::kInvariantViolation,
                  "gripper list length differs from waypoint count");
    }
    for (double g : *t.gripper) {
      if (!(g >= 0.0 && g <= 1.0)) {
        throw Error(ErrorCode::kInvariantViolation,
                    "gripper opening outside [0, 1]");
      }
    }
  }
}

std::vector<TokenId> SerializeTuple(const PoseTuple& t, const Vocab& v,
                                    const QuantizerSet& q) {
  RequireCompatible(v, q);
  CheckInvariants(t);
  std::vector<TokenId> out;
  out.reserve(TupleTokenCount(t.category.size(), t.size.has_value()));
  out.push_back(v.id(Structural::kObj));
  out.push_back(v.id(Structural::kText));
  const std::size_t n = t.category.size();
  out.push_back(v.id(TokenFamily::kLoc, static_cast<std::uint32_t>(n >> 8)));
  out.push_back(v.id(TokenFamily::kLoc, static_cast<std::uint32_t>(n & 0xFF)));
  for (char ch : t.category) {
    out.push_back(v.id(TokenFamily::kLoc, static_cast<std::uint8_t>(ch)));
  }
  out.push_back(v.id(TokenFamily::kLoc, EncodeValue(q.loc(), t.box_center.x())));
  out.push_back(v.id(TokenFamily::kLoc, EncodeValue(q.loc(), t.box_center.y())));
  AppendPose(EncodePose(q, t.pose), v, out);
  if (t.size) {
    for (std::uint32_t idx : EncodeSize(q, *t.size)) {
      out.push_back(v.id(TokenFamily::kSize, idx));
    }
  }
  out.push_back(v.id(Structural::kSep));
  return out;
}

std::vector<TokenId> SerializeTrajectory(const Trajectory& tr, const Vocab& v,
                                         const QuantizerSet& q) {
  RequireCompatible(v, q);
  CheckInvariants(tr);
  std::vector<TokenId> out;
  out.reserve(TrajectoryTokenCount(tr.waypoints.size(), tr.gripper.has_value()));
  out.push_back(v.id(Structural::kTraj));
  for (std::size_t i = 0; i < tr.waypoints.size(); ++i) {
    out.push_back(v.id(Structural::kWp));
    AppendPose(EncodePose(q, tr.waypoints[i]), v, out);
    if (tr.gripper) {
      out.push_back(
          v.id(TokenFamily::kLoc, EncodeValue(q.loc(), (*tr.gripper)[i])));
    }
  }
  out.push_back(v.id(Structural::kEos));
  return out;
}

std::vector<SequenceItem> ParseSequence(std::span<const TokenId> ids,
                                        const Vocab& v, const QuantizerSet& q) {
  RequireCompatible(v, q);
  Cursor c(ids, v);
  std::vector<SequenceItem> items;
  while (!c.AtEnd()) {
    if (c.PeekIs(Structural::kObj)) {
      items.emplace_back(ParseTuple(c, q));
    } else if (c.PeekIs(Structural::kTraj)) {
      items.emplace_back(ParseTrajectory(c, q));
    } else {
      c.Fail("expected <obj> or <traj>, found " + DescribeToken(c.Peek()));
    }
  }
  return items;
}

std::size_t TupleTokenCount(std::size_t category_bytes, bool has_size) {
  return category_bytes + 13 + (has_size ? 3 : 0);
}

std::size_t TrajectoryTokenCount(std::size_t waypoints, bool has_gripper) {
  return 2 + waypoints * (has_gripper ? 8 : 7);
}

std::string FormatTokens(std::span<const TokenId> ids, TokenFormat format) {
  std::string out;
  if (format == TokenFormat::kBinary) {
    out.resize(ids.size() * 4);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (int k = 0; k < 4; ++k) {
        out[4 * i + k] = static_cast<char>((ids[i] >> (8 * k)) & 0xFF);
      }
    }
    return out;
  }
  for (const TokenId id : ids) {
    out += std::to_string(id);
    out += '\n';
  }
  return out;
}

std::vector<TokenId> ParseTokens(std::string_view data, TokenFormat format) {
  std::vector<TokenId> ids;
  if (format == TokenFormat::kBinary) {
    ids.resize(data.size() / 4);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      TokenId id = 0;
      for (int k = 0; k < 4; ++k) {
        id |= static_cast<TokenId>(static_cast<unsigned char>(data[4 * i + k]))
              << (8 * k);
      }
      ids[i] = id;
    }
    if (data.size() % 4 != 0) {
      throw Error(ErrorCode::kTruncated,
                  "binary token data ends inside an id (" +
                      std::to_string(data.size()) + " bytes)",
                  ids.size());
    }
    return ids;
  }
  std::size_t start = 0;
  while (start < data.size()) {
    std::size_t end = data.find('\n', start);
    if (end == std::string_view::npos) end = data.size();
    std::string_view line = data.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    if (line.empty()) continue;
    TokenId id = 0;
    const auto [ptr, ec] =
        std::from_chars(line.data(), line.data() + line.size(), id);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw Error(ErrorCode::kUnknownToken,
                  "'" + std::string(line) + "' is not a token id", ids.size());
    }
    ids.push_back(id);
  }
  return ids;
}

}  // namespace posekit
