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

// Canonical interchange records, one JSON object per line.
//
// Scene record:
//   {"schema_version": 1, "kind": "scene", "id": "...", "image": "...",
//    "depth": "..." (optional), "instruction": "..." (optional),
//    "intrinsics": {"fx", "fy", "cx", "cy", "width", "height"},
//    "annotations": [{"category": "...", "box_center_px": [u, v],
//                     "pose": {"translation": [x, y, z],
//                              "rotation": [w, x, y, z]},
//                     "size": [dx, dy, dz] (optional)}]}
//
// Trajectory record:
//   {"schema_version": 1, "kind": "trajectory", "id": "...",
//    "instruction": "...",
//    "views": [{"view_id": "...", "intrinsics": {...},
//               "extrinsics": {"translation": [...], "rotation": [...]}}],
//    "frames": [{"timestamp": t,
//                "arms": [{"arm_id": "...", "ee_pose": {...},
//                          "gripper": g}]}]}
//
// View extrinsics map base-frame coordinates to camera-frame coordinates.
// Every frame lists the same arms in the same order.

#ifndef POSEKIT_RECORDS_H_
#define POSEKIT_RECORDS_H_

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "posekit/geometry.h"

namespace posekit {

inline constexpr int kSchemaVersion = 1;

struct Annotation {
  std::string category;
  Eigen::Vector2d box_center_px = Eigen::Vector2d::Zero();
  Se3Pose pose;
  std::optional<Eigen::Vector3d> size;
};

struct SceneRecord {
  std::string id;
  std::string image_ref;
  CameraIntrinsics intrinsics;
  std::optional<std::string> depth_ref;
  std::optional<std::string> instruction;
  std::vector<Annotation> annotations;

  // (px / width, py / height) for annotation i.
  Eigen::Vector2d NormalizedCenter(std::size_t i) const;
};

struct CameraView {
  std::string view_id;
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
};

struct ArmState {
  std::string arm_id;
  Se3Pose ee_pose_base;
  double gripper = 0.0;
};

struct TrajectoryFrame {
  double timestamp = 0.0;
  std::vector<ArmState> arms;
};

struct TrajectoryRecord {
  std::string id;
  std::string instruction;
  std::vector<CameraView> views;
  std::vector<TrajectoryFrame> frames;
};

using Record = std::variant<SceneRecord, TrajectoryRecord>;

// Each validator parses one JSON object and checks every invariant.
// SchemaError messages start with a JSON pointer to the offending field;
// InvariantViolation messages name the offending annotation or frame.
SceneRecord ValidateScene(std::string_view json_text);
TrajectoryRecord ValidateTrajectory(std::string_view json_text);
// Dispatches on "kind".
Record ParseRecord(std::string_view json_text);

const std::string& RecordId(const Record& r);

std::string ToJson(const SceneRecord& r);
std::string ToJson(const TrajectoryRecord& r);

}  // namespace posekit

#endif  // POSEKIT_RECORDS_H_
