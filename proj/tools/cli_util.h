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

// Shared plumbing for the posekit command-line tool.

#ifndef POSEKIT_TOOLS_CLI_UTIL_H_
#define POSEKIT_TOOLS_CLI_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "posekit/error.h"
#include "posekit/geometry.h"
#include "posekit/priors.h"
#include "posekit/quantizer.h"
#include "posekit/records.h"
#include "posekit/vocab_grammar.h"

namespace posekit::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitSchema = 2,
  kExitFitting = 3,
  kExitTokenStream = 4,
  kExitView = 5,
  kExitShape = 6,
};

int ExitCodeFor(ErrorCode code);

// One parsed input line.
struct NumberedRecord {
  std::size_t line = 0;
  Record record;
};

// Reads a JSON Lines file of records, skipping blank lines. A record that
// fails validation throws (strict) or is reported on stderr and skipped
// (skip_on_error); `failures` counts skipped lines. Thrown errors carry the
// line number as position.
std::vector<NumberedRecord> ReadRecords(const std::filesystem::path& path,
                                        bool skip_on_error,
                                        std::size_t* failures = nullptr);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view data);

// Parses "p_ray=0.5,p_depth=0.25,keep=0.8"; unset keys keep their defaults
// (no dropping, keep everything). Throws InvalidArgument.
MaskPolicy ParseMaskPolicy(std::string_view text, std::uint64_t seed);

// {"fx", "fy", "cx", "cy", "width", "height"}, either bare or under an
// "intrinsics" key. Throws SchemaError.
CameraIntrinsics ParseIntrinsicsJson(const nlohmann::json& j);

// {"family_sizes": {"loc": n, "rot": n, "trans_xy": n, "trans_z": n,
// "size": n}}; omitted families keep the default 1024. Throws SchemaError.
VocabConfig LoadVocabConfig(const std::filesystem::path& path);

TokenFormat TokenFormatFromName(std::string_view name);
// kText for ".txt", kBinary otherwise.
TokenFormat TokenFormatForPath(const std::filesystem::path& path);

nlohmann::json PoseToJson(const Se3Pose& pose);
nlohmann::json ItemToJson(const SequenceItem& item);

// Per-family fitted-table quality: bin occupancy spread and index entropy.
struct Occupancy {
  std::size_t samples = 0;
  std::size_t min_count = 0;
  std::size_t max_count = 0;
  double expected = 0.0;
  double entropy_bits = 0.0;
  double entropy_ratio = 0.0;  // entropy_bits / log2(n_bins)
};
Occupancy MeasureOccupancy(const BinTable& table,
                           const std::vector<double>& samples);

}  // namespace posekit::cli

#endif  // POSEKIT_TOOLS_CLI_UTIL_H_
