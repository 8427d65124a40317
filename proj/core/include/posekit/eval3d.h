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

// 3D grounding evaluation: oriented-box IoU, greedy matching, all-point AP
// and per-category mAP at a fixed IoU threshold.
//
// Every prediction carries confidence 1.0, so the precision-recall sweep
// orders predictions by descending best IoU against same-category ground
// truth in the same image, ties broken by input index.

#ifndef POSEKIT_EVAL3D_H_
#define POSEKIT_EVAL3D_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "posekit/geometry.h"
#include "posekit/records.h"

namespace posekit {

inline constexpr double kDefaultIouThreshold = 0.15;
inline constexpr double kFixedConfidence = 1.0;

class OrientedBox3D {
 public:
  // dims are full extents along the box's local axes. Throws DegenerateBox
  // when any dim is <= 1e-9 or non-finite.
  OrientedBox3D(const Eigen::Vector3d& center, const Eigen::Vector3d& dims,
                const Eigen::Quaterniond& rotation);

  const Eigen::Vector3d& center() const noexcept { return center_; }
  const Eigen::Vector3d& dims() const noexcept { return dims_; }
  const Eigen::Quaterniond& rotation() const noexcept { return rotation_; }
  double Volume() const noexcept { return dims_.prod(); }

  // Box moved by a rigid transform.
  OrientedBox3D Transformed(const Se3Pose& t) const;

 private:
  Eigen::Vector3d center_;
  Eigen::Vector3d dims_;
  Eigen::Quaterniond rotation_;
};

// True when the rotation is a pure rotation about +z (the up axis used by the
// exact backend) within `tolerance` on the x and y quaternion components.
bool IsYawAligned(const OrientedBox3D& box, double tolerance = 1e-6);

enum class IouMethod { kExactYaw, kMonteCarlo };

struct MonteCarloOptions {
  std::uint64_t samples = std::uint64_t{1} << 20;
  std::uint64_t seed = 0x5EEDB0C5ULL;
};

// kExactYaw throws NotYawAligned unless both boxes pass IsYawAligned.
double Iou3d(const OrientedBox3D& a, const OrientedBox3D& b, IouMethod method,
             const MonteCarloOptions& mc = {});
// Exact when both boxes are yaw aligned, Monte Carlo otherwise.
double Iou3dAuto(const OrientedBox3D& a, const OrientedBox3D& b,
                 const MonteCarloOptions& mc = {});

struct Detection {
  std::string image_id;
  std::string category;
  OrientedBox3D box;
  double confidence = kFixedConfidence;
};

struct GroundTruth {
  std::string image_id;
  std::string category;
  OrientedBox3D box;
};

struct MatchResult {
  // Processing order over prediction indices.
  std::vector<std::size_t> order;
  // Indexed by prediction.
  std::vector<double> best_iou;
  std::vector<bool> is_tp;
  std::vector<std::optional<std::size_t>> matched_gt;
  std::size_t unmatched_gt = 0;
};

// Greedy matching from an IoU matrix (rows: predictions, cols: ground truth).
// Predictions run in order of descending best IoU, ties by index; each takes
// its highest-IoU unmatched ground truth (lowest index on ties) when that IoU
// is >= threshold, else it is a false positive.
MatchResult MatchFromIou(const Eigen::MatrixXd& iou, double threshold);

// Matches boxes of one category within one image.
MatchResult MatchDetections(std::span<const OrientedBox3D> preds,
                            std::span<const OrientedBox3D> gts,
                            double threshold = kDefaultIouThreshold);

// All-point interpolated AP over labels given in sweep order. Returns
// nullopt when n_gt == 0 and there are no predictions (category excluded),
// and 0 when n_gt == 0 with predictions.
std::optional<double> AveragePrecision(const std::vector<bool>& labels,
                                       std::size_t n_gt);

struct CategoryResult {
  std::string category;
  std::optional<double> ap;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t n_gt = 0;
  std::size_t n_pred = 0;
};

struct EvalReport {
  double threshold = kDefaultIouThreshold;
  // Mean AP over categories with at least one ground truth; 0 if none.
  double map = 0.0;
  // Keyed by normalized category.
  std::map<std::string, CategoryResult> per_category;
};

// Categories match after NFC normalization and case folding. Throws
// InvalidArgument if a detection's confidence is not 1.0.
EvalReport Evaluate(std::span<const Detection> preds,
                    std::span<const GroundTruth> gts,
                    double threshold = kDefaultIouThreshold);

std::string ReportToJson(const EvalReport& report);

struct PoseError {
  double translation = 0.0;  // meters
  double rotation = 0.0;     // radians, geodesic
};
PoseError PoseErrors(const Se3Pose& pred, const Se3Pose& gt);

// Boxes from scene annotations (image id = record id). Throws SchemaError
// for annotations without a size.
std::vector<GroundTruth> GroundTruthFromScene(const SceneRecord& scene);
std::vector<Detection> DetectionsFromScene(const SceneRecord& scene);

}  // namespace posekit

#endif  // POSEKIT_EVAL3D_H_
