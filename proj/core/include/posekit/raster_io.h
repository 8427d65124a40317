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

// Depth raster readers and writers.
//
//  .png  16-bit grayscale, millimeters; 0 marks an invalid pixel.
//  .pfm  Portable Float Map ("Pf", single channel), meters; values <= 0 or
//        non-finite are invalid.

#ifndef POSEKIT_RASTER_IO_H_
#define POSEKIT_RASTER_IO_H_

#include <filesystem>

#include "posekit/priors.h"

namespace posekit {

// Dispatches on extension. Throws IoFailure on unreadable or unsupported
// files.
DepthMap LoadDepthRaster(const std::filesystem::path& path);

DepthMap LoadDepthPng16(const std::filesystem::path& path);
DepthMap LoadDepthPfm(const std::filesystem::path& path);

// Values are rounded to whole millimeters and clamped to [0, 65535].
void SaveDepthPng16(const DepthMap& depth, const std::filesystem::path& path);
// Values are stored as float32.
void SaveDepthPfm(const DepthMap& depth, const std::filesystem::path& path);

}  // namespace posekit

#endif  // POSEKIT_RASTER_IO_H_
