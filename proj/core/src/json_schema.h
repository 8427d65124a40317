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

// Typed access into parsed JSON that reports failures as SchemaError with a
// JSON pointer to the offending value.

#ifndef POSEKIT_SRC_JSON_SCHEMA_H_
#define POSEKIT_SRC_JSON_SCHEMA_H_

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "json.hpp"
#include "posekit/error.h"
#include "posekit/geometry.h"

namespace posekit {

class JsonNode {
 public:
  JsonNode(const nlohmann::json& j, std::string path)
      : j_(j), path_(std::move(path)) {}

  static nlohmann::json Parse(std::string_view text) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kSchemaError,
                  std::string("invalid JSON: ") + e.what());
    }
  }

  const std::string& path() const noexcept { return path_; }
  const nlohmann::json& raw() const noexcept { return j_; }

  bool Has(const char* key) const {
    return j_.is_object() && j_.contains(key) && !j_.at(key).is_null();
  }

  JsonNode Field(const char* key) const {
    if (!j_.is_object()) Fail("expected object");
    auto it = j_.find(key);
    if (it == j_.end()) {
      throw Error(ErrorCode::kSchemaError,
                  path_ + "/" + key + ": missing required field");
    }
    return JsonNode(*it, path_ + "/" + key);
  }

  JsonNode At(std::size_t i) const {
    return JsonNode(j_.at(i), path_ + "/" + std::to_string(i));
  }

  std::size_t ArraySize() const {
    if (!j_.is_array()) Fail("expected array");
    return j_.size();
  }

  double Number() const {
    if (!j_.is_number()) Fail("expected number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) Fail("expected finite number");
    return v;
  }

  long long Integer() const {
    if (!j_.is_number_integer()) Fail("expected integer");
    return j_.get<long long>();
  }

  std::string String() const {
    if (!j_.is_string()) Fail("expected string");
    return j_.get<std::string>();
  }

  template <int N>
  Eigen::Matrix<double, N, 1> Vector() const {
    if (ArraySize() != N) {
      Fail("expected array of " + std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v[i] = At(i).Number();
    return v;
  }

  // {"translation": [x, y, z], "rotation": [w, x, y, z]}; the rotation must
  // be unit norm within 1e-6.
  Se3Pose Pose() const {
    const Eigen::Vector3d t = Field("translation").Vector<3>();
    const JsonNode rot = Field("rotation");
    const Eigen::Vector4d q = rot.Vector<4>();
    if (std::abs(q.norm() - 1.0) > 1e-6) {
      throw Error(ErrorCode::kInvariantViolation,
                  rot.path() + ": rotation quaternion is not unit norm");
    }
    return Se3Pose(t, Eigen::Quaterniond(q[0], q[1], q[2], q[3]));
  }

  CameraIntrinsics Intrinsics() const {
    const double fx = Field("fx").Number();
    const double fy = Field("fy").Number();
    const double cx = Field("cx").Number();
    const double cy = Field("cy").Number();
    const long long width = Field("width").Integer();
    const long long height = Field("height").Integer();
    if (width <= 0 || height <= 0 || width > (1 << 20) || height > (1 << 20)) {
      throw Error(ErrorCode::kInvariantViolation,
                  path_ + ": image size out of range");
    }
    try {
      return CameraIntrinsics(fx, fy, cx, cy, static_cast<int>(width),
                              static_cast<int>(height));
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvariantViolation, path_ + ": " + e.message());
    }
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorCode::kSchemaError,
                (path_.empty() ? std::string("/") : path_) + ": " + what);
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
};

inline nlohmann::json PoseToJson(const Se3Pose& p) {
  const auto& t = p.translation();
  const auto& q = p.rotation();
  return {{"translation", {t.x(), t.y(), t.z()}},
          {"rotation", {q.w(), q.x(), q.y(), q.z()}}};
}

inline nlohmann::json IntrinsicsToJson(const CameraIntrinsics& k) {
  return {{"fx", k.fx()}, {"fy", k.fy()}, {"cx", k.cx()},
          {"cy", k.cy()}, {"width", k.width()}, {"height", k.height()}};
}

}  // namespace posekit

#endif  // POSEKIT_SRC_JSON_SCHEMA_H_
