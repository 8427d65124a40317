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

#include "posekit/records.h"

#include <string>

#include "json_schema.h"
#include "posekit/error.h"

namespace posekit {
namespace {

using nlohmann::json;

void CheckHeader(const JsonNode& root, std::string_view kind) {
  if (!root.raw().is_object()) root.Fail("record must be a JSON object");
  const long long version = root.Field("schema_version").Integer();
  if (version != kSchemaVersion) {
    throw Error(ErrorCode::kSchemaError,
                "/schema_version: unsupported version " +
                    std::to_string(version));
  }
  const std::string actual = root.Field("kind").String();
  if (actual != kind) {
    throw Error(ErrorCode::kSchemaError, "/kind: expected \"" +
                                             std::string(kind) + "\", got \"" +
                                             actual + "\"");
  }
}

std::string RequireId(const JsonNode& root) {
  std::string id = root.Field("id").String();
  if (id.empty()) root.Field("id").Fail("record id must be non-empty");
  return id;
}

Annotation ParseAnnotation(const JsonNode& node, const CameraIntrinsics& k) {
  Annotation a;
  a.category = node.Field("category").String();
  a.box_center_px = node.Field("box_center_px").Vector<2>();
  a.pose = node.Field("pose").Pose();
  if (node.Has("size")) a.size = node.Field("size").Vector<3>();

  if (!(a.box_center_px.x() >= 0.0 && a.box_center_px.x() < k.width() &&
        a.box_center_px.y() >= 0.0 && a.box_center_px.y() < k.height())) {
    throw Error(ErrorCode::kInvariantViolation,
                node.path() + ": box center outside [0, width) x [0, height)");
  }
  if (!(a.pose.translation().z() > 0.0)) {
    throw Error(ErrorCode::kInvariantViolation,
                node.path() + ": object not in front of camera (z = " +
                    std::to_string(a.pose.translation().z()) + ")");
  }
  if (a.size && !(a.size->minCoeff() > 0.0)) {
    throw Error(ErrorCode::kInvariantViolation,
                node.path() + ": size components must be positive");
  }
  return a;
}

}  // namespace

Eigen::Vector2d SceneRecord::NormalizedCenter(std::size_t i) const {
  const Eigen::Vector2d& px = annotations.at(i).box_center_px;
  return {px.x() / intrinsics.width(), px.y() / intrinsics.height()};
}

SceneRecord ValidateScene(std::string_view json_text) {
  const json doc = JsonNode::Parse(json_text);
  const JsonNode root(doc, "");
  CheckHeader(root, "scene");
  SceneRecord r{RequireId(root), root.Field("image").String(),
                root.Field("intrinsics").Intrinsics(), std::nullopt,
                std::nullopt, {}};
  if (root.Has("depth")) r.depth_ref = root.Field("depth").String();
  if (root.Has("instruction")) r.instruction = root.Field("instruction").String();
  const JsonNode anns = root.Field("annotations");
  const std::size_t n = anns.ArraySize();
  r.annotations.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.annotations.push_back(ParseAnnotation(anns.At(i), r.intrinsics));
  }
  return r;
}

TrajectoryRecord ValidateTrajectory(std::string_view json_text) {
  const json doc = JsonNode::Parse(json_text);
  const JsonNode root(doc, "");
  CheckHeader(root, "trajectory");
  TrajectoryRecord r;
  r.id = RequireId(root);
  r.instruction = root.Field("instruction").String();

  const JsonNode views = root.Field("views");
  const std::size_t n_views = views.ArraySize();
  if (n_views == 0) {
    throw Error(ErrorCode::kInvariantViolation, "/views: need at least one view");
  }
  for (std::size_t i = 0; i < n_views; ++i) {
    const JsonNode v = views.At(i);
    CameraView view{v.Field("view_id").String(),
                    v.Field("intrinsics").Intrinsics(),
                    CameraExtrinsics{v.Field("extrinsics").Pose()}};
    for (const CameraView& other : r.views) {
      if (other.view_id == view.view_id) {
        throw Error(ErrorCode::kInvariantViolation,
                    v.path() + ": duplicate view_id '" + view.view_id + "'");
      }
    }
    r.views.push_back(std::move(view));
  }

  const JsonNode frames = root.Field("frames");
  const std::size_t n_frames = frames.ArraySize();
  if (n_frames < 2) {
    throw Error(ErrorCode::kInvariantViolation,
                "/frames: need at least two frames");
  }
  for (std::size_t i = 0; i < n_frames; ++i) {
    const JsonNode f = frames.At(i);
    TrajectoryFrame frame;
    frame.timestamp = f.Field("timestamp").Number();
    if (i > 0 && !(frame.timestamp > r.frames.back().timestamp)) {
      throw Error(ErrorCode::kInvariantViolation,
                  f.path() + ": timestamps must be strictly increasing");
    }
    const JsonNode arms = f.Field("arms");
    const std::size_t n_arms = arms.ArraySize();
    if (n_arms == 0) {
      throw Error(ErrorCode::kInvariantViolation,
                  arms.path() + ": need at least one arm");
    }
    for (std::size_t a = 0; a < n_arms; ++a) {
      const JsonNode arm = arms.At(a);
      ArmState s{arm.Field("arm_id").String(), arm.Field("ee_pose").Pose(),
                 arm.Field("gripper").Number()};
      if (!(s.gripper >= 0.0 && s.gripper <= 1.0)) {
        throw Error(ErrorCode::kInvariantViolation,
                    arm.path() + ": gripper opening outside [0, 1]");
      }
      frame.arms.push_back(std::move(s));
    }
    if (i > 0) {
      const auto& first = r.frames.front().arms;
      bool same = first.size() == frame.arms.size();
      for (std::size_t a = 0; same && a < first.size(); ++a) {
        same = first[a].arm_id == frame.arms[a].arm_id;
      }
      if (!same) {
        throw Error(ErrorCode::kInvariantViolation,
                    arms.path() + ": arm ids differ from the first frame");
      }
    }
    r.frames.push_back(std::move(frame));
  }
  return r;
}

Record ParseRecord(std::string_view json_text) {
  const json doc = JsonNode::Parse(json_text);
  const JsonNode root(doc, "");
  if (!doc.is_object()) root.Fail("record must be a JSON object");
  const std::string kind = root.Field("kind").String();
  if (kind == "scene") return ValidateScene(json_text);
  if (kind == "trajectory") return ValidateTrajectory(json_text);
  throw Error(ErrorCode::kSchemaError, "/kind: unknown record kind \"" + kind +
                                           "\"");
}

const std::string& RecordId(const Record& r) {
  return std::visit([](const auto& rec) -> const std::string& { return rec.id; },
                    r);
}

std::string ToJson(const SceneRecord& r) {
  json j = {{"schema_version", kSchemaVersion},
            {"kind", "scene"},
            {"id", r.id},
            {"image", r.image_ref},
            {"intrinsics", IntrinsicsToJson(r.intrinsics)}};
  if (r.depth_ref) j["depth"] = *r.depth_ref;
  if (r.instruction) j["instruction"] = *r.instruction;
  json anns = json::array();
  for (const Annotation& a : r.annotations) {
    json ja = {{"category", a.category},
               {"box_center_px", {a.box_center_px.x(), a.box_center_px.y()}},
               {"pose", PoseToJson(a.pose)}};
    if (a.size) ja["size"] = {a.size->x(), a.size->y(), a.size->z()};
    anns.push_back(std::move(ja));
  }
  j["annotations"] = std::move(anns);
  return j.dump();
}

std::string ToJson(const TrajectoryRecord& r) {
  json views = json::array();
  for (const CameraView& v : r.views) {
    views.push_back({{"view_id", v.view_id},
                     {"intrinsics", IntrinsicsToJson(v.intrinsics)},
                     {"extrinsics", PoseToJson(v.extrinsics.pose_of_base_in_camera)}});
  }
  json frames = json::array();
  for (const TrajectoryFrame& f : r.frames) {
    json arms = json::array();
    for (const ArmState& a : f.arms) {
      arms.push_back({{"arm_id", a.arm_id},
                      {"ee_pose", PoseToJson(a.ee_pose_base)},
                      {"gripper", a.gripper}});
    }
    frames.push_back({{"timestamp", f.timestamp}, {"arms", std::move(arms)}});
  }
  json j = {{"schema_version", kSchemaVersion},
            {"kind", "trajectory"},
            {"id", r.id},
            {"instruction", r.instruction},
            {"views", std::move(views)},
            {"frames", std::move(frames)}};
  return j.dump();
}

}  // namespace posekit
