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

#include "posekit/text.h"

#include <gtest/gtest.h>

#include "posekit/error.h"

namespace posekit {
namespace {

TEST(CategoryKeyTest, NormalizesAndFolds) {
  EXPECT_EQ(CategoryKey("mug"), "mug");
  EXPECT_EQ(CategoryKey("MUG"), "mug");
  EXPECT_EQ(CategoryKey("Caf\xC3\xA9"), CategoryKey("cafe\xCC\x81"));
  EXPECT_EQ(CategoryKey("cafe\xCC\x81"), "caf\xC3\xA9");
  EXPECT_EQ(CategoryKey("Stra\xC3\x9F" "e"), "strasse");
  EXPECT_EQ(CategoryKey(""), "");
  EXPECT_NE(CategoryKey("mug"), CategoryKey("mug "));
}

TEST(CategoryKeyTest, MalformedUtf8) {
  try {
    CategoryKey("bad\xC3");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

}  // namespace
}  // namespace posekit
