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

#ifndef POSEKIT_ERROR_H_
#define POSEKIT_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace posekit {

enum class ErrorCode {
  kInvalidArgument,
  // quantizer
  kTooFewSamples,
  kNonFiniteSample,
  kInvalidRange,
  kIndexOutOfRange,
  kNonPositiveSize,
  kIoFailure,
  kFormatVersionMismatch,
  kCorruptTable,
  // vocab_grammar
  kUnknownToken,
  kMalformedStructure,
  kTruncated,
  // priors
  kNonDivisibleShape,
  // ingest
  kSchemaError,
  kInvariantViolation,
  kUnknownView,
  kEmptyTrajectory,
  kInvalidHorizon,
  // eval3d
  kDegenerateBox,
  kNotYawAligned,
};

// Stable name of an error code, e.g. "MalformedStructure".
std::string_view ErrorName(ErrorCode code);

// All library failures are reported through this exception. `position`
// carries a token index for grammar errors and a record ordinal or line
// number where one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> position = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  // The detail text without the code name or position.
  const std::string& message() const noexcept { return message_; }
  const std::optional<std::size_t>& position() const noexcept {
    return position_;
  }

 private:
  ErrorCode code_;
  std::string message_;
  std::optional<std::size_t> position_;
};

}  // namespace posekit

#endif  // POSEKIT_ERROR_H_
