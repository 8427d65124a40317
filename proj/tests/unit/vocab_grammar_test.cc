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

#include <cmath>
#include <random>
#include <variant>

#include <gtest/gtest.h>

#include "corpus.h"
#include "posekit/error.h"

namespace posekit {
namespace {

using ::posekit::testing::FixedQuantizers;
using ::posekit::testing::RandomItem;

Error CaptureError(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected posekit::Error";
  return Error(ErrorCode::kInvalidArgument, "none");
}

double AngleGap(double a, double b) { return std::abs(WrapAngle(a - b)); }

std::vector<TokenId> Serialize(const SequenceItem& item, const Vocab& v,
                               const QuantizerSet& q) {
  if (const auto* t = std::get_if<PoseTuple>(&item)) {
    return SerializeTuple(*t, v, q);
  }
  return SerializeTrajectory(std::get<Trajectory>(item), v, q);
}

void ExpectPoseWithinHalfBin(const QuantizerSet& q, const Se3Pose& a,
                             const Se3Pose& b) {
  const PoseIndices idx = EncodePose(q, a);
  EXPECT_LE(std::abs(a.translation().x() - b.translation().x()),
            0.5 * q.trans_xy().bin_width(idx.trans_x) + 1e-12);
  EXPECT_LE(std::abs(a.translation().y() - b.translation().y()),
            0.5 * q.trans_xy().bin_width(idx.trans_y) + 1e-12);
  EXPECT_LE(std::abs(a.translation().z() - b.translation().z()),
            0.5 * q.trans_z().bin_width(idx.trans_z) + 1e-12);
  const EulerAngles ea = QuatToEuler(a.rotation());
  const EulerAngles eb = QuatToEuler(b.rotation());
  const double half = 0.5 * q.rot().bin_width(0) + 1e-9;
  EXPECT_LE(AngleGap(ea.roll, eb.roll), half);
  EXPECT_LE(AngleGap(ea.pitch, eb.pitch), half);
  EXPECT_LE(AngleGap(ea.yaw, eb.yaw), half);
}

class GrammarTest : public ::testing::Test {
 protected:
  GrammarTest() : q_(FixedQuantizers()), v_(BuildVocab()) {}
  QuantizerSet q_;
  Vocab v_;
};

TEST(VocabTest, DefaultLayout) {
  const Vocab v = BuildVocab();
  EXPECT_EQ(v.size(), 5u * 1024 + 6);
  EXPECT_EQ(v.offset(TokenFamily::kLoc), 0u);
  EXPECT_EQ(v.offset(TokenFamily::kRot), 1024u);
  EXPECT_EQ(v.offset(TokenFamily::kTransXy), 2048u);
  EXPECT_EQ(v.offset(TokenFamily::kTransZ), 3072u);
  EXPECT_EQ(v.offset(TokenFamily::kSize), 4096u);
  EXPECT_EQ(v.id(Structural::kObj), 5120u);
  EXPECT_EQ(v.id(Structural::kText), 5125u);
  EXPECT_EQ(BuildVocab(), v);
}

TEST(VocabTest, ClassifyInvertsId) {
  VocabConfig c;
  c.family_sizes = {300, 17, 5, 9, 2};
  const Vocab v = BuildVocab(c);
  for (TokenId id = 0; id < v.size(); ++id) {
    const Vocab::Decoded d = v.Classify(id);
    if (d.kind == Vocab::Decoded::Kind::kFamily) {
      EXPECT_EQ(v.id(d.family, d.index), id);
    } else {
      EXPECT_EQ(v.id(d.structural), id);
    }
  }
  EXPECT_EQ(CaptureError([&] { v.Classify(v.size()); }).code(),
            ErrorCode::kUnknownToken);
  EXPECT_EQ(CaptureError([&] { v.id(TokenFamily::kSize, 2); }).code(),
            ErrorCode::kIndexOutOfRange);
  c.family_sizes[1] = 0;
  EXPECT_EQ(CaptureError([&] { BuildVocab(c); }).code(),
            ErrorCode::kInvalidArgument);
}

TEST_F(GrammarTest, TupleTokenCount) {
  PoseTuple t;
  t.category = "mug";
  t.box_center = {0.5, 0.5};
  const auto ids = SerializeTuple(t, v_, q_);
  EXPECT_EQ(ids.size(), 3u + 13);
  EXPECT_EQ(ids.size(), TupleTokenCount(3, false));
  EXPECT_EQ(ids[0], v_.id(Structural::kObj));
  EXPECT_EQ(ids[1], v_.id(Structural::kText));
  EXPECT_EQ(ids[2], v_.id(TokenFamily::kLoc, 0));
  EXPECT_EQ(ids[3], v_.id(TokenFamily::kLoc, 3));
  EXPECT_EQ(ids[4], v_.id(TokenFamily::kLoc, 'm'));
  EXPECT_EQ(ids[7], v_.id(TokenFamily::kLoc, 512));
  EXPECT_EQ(ids[8], v_.id(TokenFamily::kLoc, 512));
  EXPECT_EQ(ids.back(), v_.id(Structural::kSep));
  t.size = Eigen::Vector3d(0.1, 0.2, 0.3);
  EXPECT_EQ(SerializeTuple(t, v_, q_).size(), TupleTokenCount(3, true));
}

TEST_F(GrammarTest, TrajectoryTokenCount) {
  Trajectory tr;
  tr.waypoints.push_back(Se3Pose::Translation(0.1, 0.2, 0.3));
  const auto ids = SerializeTrajectory(tr, v_, q_);
  EXPECT_EQ(ids.size(), 9u);
  EXPECT_EQ(ids.front(), v_.id(Structural::kTraj));
  EXPECT_EQ(ids[1], v_.id(Structural::kWp));
  EXPECT_EQ(ids.back(), v_.id(Structural::kEos));
  tr.waypoints.push_back(Se3Pose::Identity());
  tr.gripper = std::vector<double>{0.0, 1.0};
  EXPECT_EQ(SerializeTrajectory(tr, v_, q_).size(), 2u + 2 * 8);
  EXPECT_EQ(TrajectoryTokenCount(5, false), 37u);
}

TEST_F(GrammarTest, InvariantViolations) {
  EXPECT_EQ(CaptureError([&] { SerializeTrajectory({}, v_, q_); }).code(),
            ErrorCode::kInvariantViolation);
  Trajectory tr;
  tr.waypoints.push_back(Se3Pose::Identity());
  tr.gripper = std::vector<double>{1.5};
  EXPECT_EQ(CaptureError([&] { SerializeTrajectory(tr, v_, q_); }).code(),
            ErrorCode::kInvariantViolation);
  tr.gripper = std::vector<double>{0.5, 0.5};
  EXPECT_EQ(CaptureError([&] { SerializeTrajectory(tr, v_, q_); }).code(),
            ErrorCode::kInvariantViolation);
  PoseTuple t;
  t.box_center = {1.0, 0.5};
  EXPECT_EQ(CaptureError([&] { SerializeTuple(t, v_, q_); }).code(),
            ErrorCode::kInvariantViolation);
  t.box_center = {0.5, 0.5};
  t.size = Eigen::Vector3d(0.1, 0.0, 0.1);
  EXPECT_EQ(CaptureError([&] { SerializeTuple(t, v_, q_); }).code(),
            ErrorCode::kNonPositiveSize);
}

TEST_F(GrammarTest, IncompatibleVocabIsRejected) {
  VocabConfig c;
  c.family_sizes[0] = 512;
  EXPECT_EQ(CaptureError([&] {
              ParseSequence({}, BuildVocab(c), q_);
            }).code(),
            ErrorCode::kInvalidArgument);
  const QuantizerSet small = FixedQuantizers(64);
  EXPECT_EQ(CaptureError([&] {
              ParseSequence({}, BuildVocab(VocabConfig::FromQuantizers(small)),
                            small);
            }).code(),
            ErrorCode::kInvalidArgument);
}

TEST_F(GrammarTest, EmptySequenceParsesToNothing) {
  EXPECT_TRUE(ParseSequence({}, v_, q_).empty());
}

TEST_F(GrammarTest, WrongFamilyReportsPosition) {
  PoseTuple t;
  t.category = "cup";
  t.box_center = {0.25, 0.75};
  std::vector<TokenId> ids = SerializeTuple(t, v_, q_);
  ids[7] = v_.id(TokenFamily::kRot, 3);
  const Error e = CaptureError([&] { ParseSequence(ids, v_, q_); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformedStructure);
  EXPECT_EQ(e.position(), 7u);
}

TEST_F(GrammarTest, ErrorKindsAndPositions) {
  Trajectory tr;
  tr.waypoints = {Se3Pose::Identity(), Se3Pose::Identity()};
  const std::vector<TokenId> good = SerializeTrajectory(tr, v_, q_);

  std::vector<TokenId> cut(good.begin(), good.end() - 1);
  Error e = CaptureError([&] { ParseSequence(cut, v_, q_); });
  EXPECT_EQ(e.code(), ErrorCode::kTruncated);
  EXPECT_EQ(e.position(), cut.size());

  std::vector<TokenId> unknown = good;
  unknown[4] = v_.size() + 10;
  e = CaptureError([&] { ParseSequence(unknown, v_, q_); });
  EXPECT_EQ(e.code(), ErrorCode::kUnknownToken);
  EXPECT_EQ(e.position(), 4u);

  std::vector<TokenId> stray = {v_.id(Structural::kSep)};
  e = CaptureError([&] { ParseSequence(stray, v_, q_); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformedStructure);
  EXPECT_EQ(e.position(), 0u);

  std::vector<TokenId> no_wp = {v_.id(Structural::kTraj),
                                v_.id(Structural::kEos)};
  e = CaptureError([&] { ParseSequence(no_wp, v_, q_); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformedStructure);
  EXPECT_EQ(e.position(), 1u);

  Trajectory mixed = tr;
  mixed.gripper = std::vector<double>{0.5, 0.5};
  std::vector<TokenId> partial = SerializeTrajectory(mixed, v_, q_);
  partial.erase(partial.begin() + 16);
  e = CaptureError([&] { ParseSequence(partial, v_, q_); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformedStructure);
}

TEST_F(GrammarTest, ByteTokenAbove255IsMalformed) {
  PoseTuple t;
  t.category = "a";
  std::vector<TokenId> ids = SerializeTuple(t, v_, q_);
  ids[4] = v_.id(TokenFamily::kLoc, 300);
  const Error e = CaptureError([&] { ParseSequence(ids, v_, q_); });
  EXPECT_EQ(e.code(), ErrorCode::kMalformedStructure);
  EXPECT_EQ(e.position(), 4u);
}

TEST_F(GrammarTest, RoundTripWithinHalfBin) {
  std::mt19937_64 rng(21);
  std::vector<SequenceItem> items;
  std::vector<TokenId> stream;
  for (int i = 0; i < 500; ++i) {
    items.push_back(RandomItem(rng));
    const auto ids = Serialize(items.back(), v_, q_);
    stream.insert(stream.end(), ids.begin(), ids.end());
  }
  const std::vector<SequenceItem> back = ParseSequence(stream, v_, q_);
  ASSERT_EQ(back.size(), items.size());
  std::vector<TokenId> again;
  for (std::size_t i = 0; i < items.size(); ++i) {
    ASSERT_EQ(back[i].index(), items[i].index());
    if (const auto* t = std::get_if<PoseTuple>(&items[i])) {
      const auto& b = std::get<PoseTuple>(back[i]);
      EXPECT_EQ(b.category, t->category);
      const double loc_half = 0.5 * q_.loc().bin_width(0);
      EXPECT_LE(std::abs(b.box_center.x() - t->box_center.x()), loc_half + 1e-12);
      EXPECT_LE(std::abs(b.box_center.y() - t->box_center.y()), loc_half + 1e-12);
      ExpectPoseWithinHalfBin(q_, t->pose, b.pose);
      ASSERT_EQ(b.size.has_value(), t->size.has_value());
      if (t->size) {
        const SizeIndices s = EncodeSize(q_, *t->size);
        for (int k = 0; k < 3; ++k) {
          EXPECT_LE(std::abs((*b.size)[k] - (*t->size)[k]),
                    0.5 * q_.size().bin_width(s[k]) + 1e-12);
        }
      }
    } else {
      const auto& tr = std::get<Trajectory>(items[i]);
      const auto& b = std::get<Trajectory>(back[i]);
      ASSERT_EQ(b.waypoints.size(), tr.waypoints.size());
      ASSERT_EQ(b.gripper.has_value(), tr.gripper.has_value());
      for (std::size_t k = 0; k < tr.waypoints.size(); ++k) {
        ExpectPoseWithinHalfBin(q_, tr.waypoints[k], b.waypoints[k]);
        if (tr.gripper) {
          EXPECT_LE(std::abs((*b.gripper)[k] - (*tr.gripper)[k]),
                    0.5 * q_.loc().bin_width(0) + 1e-12);
        }
      }
    }
    const auto ids = Serialize(back[i], v_, q_);
    again.insert(again.end(), ids.begin(), ids.end());
  }
  EXPECT_EQ(again, stream);
}

TEST_F(GrammarTest, SerializationIsDeterministic) {
  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(Serialize(RandomItem(a), v_, q_), Serialize(RandomItem(b), v_, q_));
  }
}

TEST(TokenFormatTest, BinaryRoundTrip) {
  const std::vector<TokenId> ids = {0, 1, 5125, 0xDEADBEEF};
  const std::string bytes = FormatTokens(ids, TokenFormat::kBinary);
  ASSERT_EQ(bytes.size(), 16u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 0x05);
  EXPECT_EQ(static_cast<unsigned char>(bytes[9]), 0x14);
  EXPECT_EQ(ParseTokens(bytes, TokenFormat::kBinary), ids);
  const Error e = CaptureError(
      [&] { ParseTokens(bytes.substr(0, 14), TokenFormat::kBinary); });
  EXPECT_EQ(e.code(), ErrorCode::kTruncated);
  EXPECT_EQ(e.position(), 3u);
}

TEST(TokenFormatTest, TextRoundTrip) {
  const std::vector<TokenId> ids = {7, 0, 5120};
  const std::string text = FormatTokens(ids, TokenFormat::kText);
  EXPECT_EQ(text, "7\n0\n5120\n");
  EXPECT_EQ(ParseTokens(text, TokenFormat::kText), ids);
  EXPECT_EQ(ParseTokens("7\r\n\n0\n5120", TokenFormat::kText), ids);
  const Error e =
      CaptureError([] { ParseTokens("1\n2\nx3\n", TokenFormat::kText); });
  EXPECT_EQ(e.code(), ErrorCode::kUnknownToken);
  EXPECT_EQ(e.position(), 2u);
}

}  // namespace
}  // namespace posekit
