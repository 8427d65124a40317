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

#include "posekit/raster_io.h"

#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "corpus.h"
#include "posekit/error.h"

namespace posekit {
namespace {

using ::posekit::testing::RandomDepth;
using ::posekit::testing::TempDir;

TEST(RasterIoTest, Png16RoundTripAtMillimeters) {
  std::mt19937_64 rng(41);
  DepthMap d = RandomDepth(rng, 17, 23);
  DenseField mm(17, 23, 1);
  for (std::size_t i = 0; i < mm.size(); ++i) {
    mm.values()[i] = std::round(d.values().values()[i] * 1000.0) / 1000.0;
  }
  const DepthMap rounded = DepthMap::FromValues(mm);
  TempDir dir;
  SaveDepthPng16(d, dir.path() / "d.png");
  const DepthMap back = LoadDepthRaster(dir.path() / "d.png");
  EXPECT_EQ(back.mask(), rounded.mask());
  for (std::size_t i = 0; i < mm.size(); ++i) {
    EXPECT_NEAR(back.values().values()[i], rounded.values().values()[i], 1e-12);
  }
}

TEST(RasterIoTest, PfmRoundTripAtFloatPrecision) {
  std::mt19937_64 rng(42);
  const DepthMap d = RandomDepth(rng, 9, 31);
  TempDir dir;
  SaveDepthPfm(d, dir.path() / "d.pfm");
  const DepthMap back = LoadDepthRaster(dir.path() / "d.pfm");
  EXPECT_EQ(back.mask(), d.mask());
  for (std::size_t i = 0; i < d.values().size(); ++i) {
    EXPECT_EQ(back.values().values()[i],
              static_cast<double>(static_cast<float>(d.values().values()[i])));
  }
}

TEST(RasterIoTest, FailuresAreIoErrors) {
  TempDir dir;
  try {
    LoadDepthRaster(dir.path() / "missing.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoFailure);
  }
  std::ofstream(dir.path() / "bad.png") << "not a png";
  EXPECT_THROW(LoadDepthRaster(dir.path() / "bad.png"), Error);
  std::ofstream(dir.path() / "short.pfm") << "Pf\n4 4\n-1.0\n";
  EXPECT_THROW(LoadDepthRaster(dir.path() / "short.pfm"), Error);
  std::ofstream(dir.path() / "x.tiff") << "x";
  EXPECT_THROW(LoadDepthRaster(dir.path() / "x.tiff"), Error);
}

}  // namespace
}  // namespace posekit
