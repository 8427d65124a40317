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

#include "posekit/error.h"

namespace posekit {

std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kNonFiniteSample: return "NonFiniteSample";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNonPositiveSize: return "NonPositiveSize";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kCorruptTable: return "CorruptTable";
    case ErrorCode::kUnknownToken: return "UnknownToken";
    case ErrorCode::kMalformedStructure: return "MalformedStructure";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kNonDivisibleShape: return "NonDivisibleShape";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kUnknownView: return "UnknownView";
    case ErrorCode::kEmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::kInvalidHorizon: return "InvalidHorizon";
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kNotYawAligned: return "NotYawAligned";
  }
  return "Unknown";
}

namespace {

std::string FormatMessage(ErrorCode code, const std::string& message,
                          const std::optional<std::size_t>& position) {
  std::string out(ErrorName(code));
  out += ": ";
  out += message;
  if (position) {
    out += " (at position ";
    out += std::to_string(*position);
    out += ")";
  }
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> position)
    : std::runtime_error(FormatMessage(code, message, position)),
      code_(code),
      message_(message),
      position_(position) {}

}  // namespace posekit
