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

#include "cli_util.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <variant>

namespace posekit::cli {

using nlohmann::json;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchemaError:
    case ErrorCode::kInvariantViolation:
    case ErrorCode::kNonPositiveSize:
    case ErrorCode::kEmptyTrajectory:
    case ErrorCode::kDegenerateBox:
    case ErrorCode::kNotYawAligned:
      return kExitSchema;
    case ErrorCode::kTooFewSamples:
    case ErrorCode::kNonFiniteSample:
    case ErrorCode::kInvalidRange:
      return kExitFitting;
    case ErrorCode::kUnknownToken:
    case ErrorCode::kMalformedStructure:
    case ErrorCode::kTruncated:
    case ErrorCode::kIndexOutOfRange:
      return kExitTokenStream;
    case ErrorCode::kUnknownView:
      return kExitView;
    case ErrorCode::kNonDivisibleShape:
      return kExitShape;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kIoFailure:
    case ErrorCode::kFormatVersionMismatch:
    case ErrorCode::kCorruptTable:
    case ErrorCode::kInvalidHorizon:
      return kExitUsage;
  }
  return kExitUsage;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void WriteFile(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

std::vector<NumberedRecord> ReadRecords(const std::filesystem::path& path,
                                        bool skip_on_error,
                                        std::size_t* failures) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<NumberedRecord> out;
  std::size_t skipped = 0;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back({line, ParseRecord(text)});
    } catch (const Error& e) {
      const std::string msg =
          path.filename().string() + ":" + std::to_string(line) + ": " +
          e.message();
      if (!skip_on_error) throw Error(e.code(), msg, line);
      std::cerr << "skipped " << msg << '\n';
      ++skipped;
    }
  }
  if (failures != nullptr) *failures = skipped;
  return out;
}

MaskPolicy ParseMaskPolicy(std::string_view text, std::uint64_t seed) {
  MaskPolicy policy;
  policy.seed = seed;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view item = text.substr(start, end - start);
    start = end + 1;
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mask policy entry '" + std::string(item) + "' needs key=value");
    }
    const std::string_view key = item.substr(0, eq);
    const std::string value(item.substr(eq + 1));
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "mask policy value '" + value + "' is not a number");
    }
    if (key == "p_ray") {
      policy.p_drop_ray = v;
    } else if (key == "p_depth") {
      policy.p_drop_depth = v;
    } else if (key == "keep") {
      policy.sparse_keep_fraction = v;
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown mask policy key '" + std::string(key) + "'");
    }
  }
  policy.Validate();
  return policy;
}

CameraIntrinsics ParseIntrinsicsJson(const json& j) {
  const json& k = j.is_object() && j.contains("intrinsics") ? j["intrinsics"] : j;
  auto number = [&](const char* name) {
    if (!k.is_object() || !k.contains(name) || !k[name].is_number()) {
      throw Error(ErrorCode::kSchemaError,
                  std::string("/intrinsics/") + name + ": missing or not a number");
    }
    return k[name].get<double>();
  };
  auto integer = [&](const char* name) {
    const double v = number(name);
    if (v != std::floor(v) || v < 1 || v > 1e6) {
      throw Error(ErrorCode::kSchemaError,
                  std::string("/intrinsics/") + name +
                      ": must be a positive integer");
    }
    return static_cast<int>(v);
  };
  try {
    return CameraIntrinsics(number("fx"), number("fy"), number("cx"),
                            number("cy"), integer("width"), integer("height"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaError) throw;
    throw Error(ErrorCode::kSchemaError,
                std::string("/intrinsics: ") + e.message());
  }
}

VocabConfig LoadVocabConfig(const std::filesystem::path& path) {
  const json j = json::parse(ReadFile(path), nullptr, false);
  if (!j.is_object()) {
    throw Error(ErrorCode::kSchemaError, path.string() + ": not a JSON object");
  }
  VocabConfig config;
  if (!j.contains("family_sizes")) return config;
  const json& sizes = j["family_sizes"];
  if (!sizes.is_object()) {
    throw Error(ErrorCode::kSchemaError, "/family_sizes: not an object");
  }
  for (const auto& [name, value] : sizes.items()) {
    TokenFamily family;
    try {
      family = FamilyFromName(name);
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchemaError,
                  "/family_sizes/" + name + ": " + e.what());
    }
    if (!value.is_number_unsigned() || value.get<std::uint64_t>() == 0 ||
        value.get<std::uint64_t>() > (1u << 24)) {
      throw Error(ErrorCode::kSchemaError,
                  "/family_sizes/" + name + ": must be a positive integer");
    }
    config.family_sizes[static_cast<std::size_t>(family)] =
        value.get<std::uint32_t>();
  }
  return config;
}

TokenFormat TokenFormatFromName(std::string_view name) {
  if (name == "binary") return TokenFormat::kBinary;
  if (name == "text") return TokenFormat::kText;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown token format '" + std::string(name) + "'");
}

TokenFormat TokenFormatForPath(const std::filesystem::path& path) {
  return path.extension() == ".txt" ? TokenFormat::kText : TokenFormat::kBinary;
}

json PoseToJson(const Se3Pose& pose) {
  const Eigen::Vector3d& t = pose.translation();
  const Eigen::Quaterniond& q = pose.rotation();
  const EulerAngles e = QuatToEuler(q);
  return {{"translation", {t.x(), t.y(), t.z()}},
          {"rotation", {q.w(), q.x(), q.y(), q.z()}},
          {"euler", {e.roll, e.pitch, e.yaw}}};
}

json ItemToJson(const SequenceItem& item) {
  if (const auto* t = std::get_if<PoseTuple>(&item)) {
    json j = {{"type", "tuple"},
              {"category", t->category},
              {"box_center", {t->box_center.x(), t->box_center.y()}},
              {"pose", PoseToJson(t->pose)}};
    if (t->size) j["size"] = {t->size->x(), t->size->y(), t->size->z()};
    return j;
  }
  const auto& tr = std::get<Trajectory>(item);
  json waypoints = json::array();
  for (const Se3Pose& p : tr.waypoints) waypoints.push_back(PoseToJson(p));
  json j = {{"type", "trajectory"}, {"waypoints", std::move(waypoints)}};
  if (tr.gripper) j["gripper"] = *tr.gripper;
  return j;
}

Occupancy MeasureOccupancy(const BinTable& table,
                           const std::vector<double>& samples) {
  Occupancy o;
  o.samples = samples.size();
  std::vector<std::size_t> counts(table.n_bins(), 0);
  for (double x : samples) ++counts[EncodeValue(table, x)];
  o.min_count = *std::min_element(counts.begin(), counts.end());
  o.max_count = *std::max_element(counts.begin(), counts.end());
  o.expected = static_cast<double>(samples.size()) / table.n_bins();
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / samples.size();
    o.entropy_bits -= p * std::log2(p);
  }
  o.entropy_ratio = o.entropy_bits / std::log2(static_cast<double>(table.n_bins()));
  return o;
}

}  // namespace posekit::cli
