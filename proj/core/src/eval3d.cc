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

#include "posekit/eval3d.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <tuple>

#include "json.hpp"
#include "posekit/counter_rng.h"
#include "posekit/error.h"
#include "posekit/text.h"

namespace posekit {
namespace {

constexpr double kMinDim = 1e-9;

using Point2 = Eigen::Vector2d;
using Polygon = std::vector<Point2>;

double Cross(const Point2& a, const Point2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double YawOf(const OrientedBox3D& box) {
  const Eigen::Quaterniond& q = box.rotation();
  return 2.0 * std::atan2(q.z(), q.w());
}

// Counter-clockwise footprint corners in the xy plane.
Polygon Footprint(const OrientedBox3D& box) {
  const double yaw = YawOf(box);
  const double c = std::cos(yaw), s = std::sin(yaw);
  const double hx = 0.5 * box.dims().x(), hy = 0.5 * box.dims().y();
  const Point2 center = box.center().head<2>();
  const std::array<Point2, 4> local = {Point2(hx, hy), Point2(-hx, hy),
                                       Point2(-hx, -hy), Point2(hx, -hy)};
  Polygon out;
  for (const Point2& p : local) {
    out.emplace_back(center.x() + c * p.x() - s * p.y(),
                     center.y() + s * p.x() + c * p.y());
  }
  return out;
}

// Sutherland-Hodgman: clip `subject` by each edge of convex CCW `clip`.
Polygon ClipConvex(Polygon subject, const Polygon& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % clip.size()];
    const Point2 edge = b - a;
    Polygon next;
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Point2& cur = subject[i];
      const Point2& prev = subject[(i + subject.size() - 1) % subject.size()];
      const double side_cur = Cross(edge, cur - a);
      const double side_prev = Cross(edge, prev - a);
      const bool in_cur = side_cur >= 0.0;
      const bool in_prev = side_prev >= 0.0;
      if (in_cur != in_prev) {
        const double t = side_prev / (side_prev - side_cur);
        next.push_back(prev + t * (cur - prev));
      }
      if (in_cur) next.push_back(cur);
    }
    subject = std::move(next);
  }
  return subject;
}

double PolygonArea(const Polygon& p) {
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    twice += Cross(p[i], p[(i + 1) % p.size()]);
  }
  return 0.5 * std::abs(twice);
}

// Strict weak order used to put an unordered pair into a canonical order so
// IoU is bit-for-bit symmetric.
bool BoxLess(const OrientedBox3D& a, const OrientedBox3D& b) {
  const auto key = [](const OrientedBox3D& x) {
    return std::array<double, 10>{x.center().x(), x.center().y(),
                                  x.center().z(), x.dims().x(),
                                  x.dims().y(),   x.dims().z(),
                                  x.rotation().w(), x.rotation().x(),
                                  x.rotation().y(), x.rotation().z()};
  };
  return key(a) < key(b);
}

double ExactYawIou(const OrientedBox3D& a, const OrientedBox3D& b) {
  const double a_lo = a.center().z() - 0.5 * a.dims().z();
  const double a_hi = a.center().z() + 0.5 * a.dims().z();
  const double b_lo = b.center().z() - 0.5 * b.dims().z();
  const double b_hi = b.center().z() + 0.5 * b.dims().z();
  const double overlap_z = std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
  if (overlap_z <= 0.0) return 0.0;
  const double area = PolygonArea(ClipConvex(Footprint(a), Footprint(b)));
  const double inter = area * overlap_z;
  const double uni = a.Volume() + b.Volume() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

struct BoxTest {
  Eigen::Matrix3d world_to_local;
  Eigen::Vector3d center;
  Eigen::Vector3d half;

  explicit BoxTest(const OrientedBox3D& box)
      : world_to_local(box.rotation().toRotationMatrix().transpose()),
        center(box.center()),
        half(0.5 * box.dims()) {}

  bool Contains(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d local = world_to_local * (p - center);
    return std::abs(local.x()) <= half.x() && std::abs(local.y()) <= half.y() &&
           std::abs(local.z()) <= half.z();
  }

  // Axis-aligned bounds of the rotated box.
  std::pair<Eigen::Vector3d, Eigen::Vector3d> Bounds() const {
    const Eigen::Vector3d extent =
        world_to_local.transpose().cwiseAbs() * half;
    return {center - extent, center + extent};
  }
};

double MonteCarloIou(const OrientedBox3D& a, const OrientedBox3D& b,
                     const MonteCarloOptions& mc) {
  const BoxTest ta(a), tb(b);
  const auto [a_min, a_max] = ta.Bounds();
  const auto [b_min, b_max] = tb.Bounds();
  const Eigen::Vector3d lo = a_min.cwiseMin(b_min);
  const Eigen::Vector3d span = a_max.cwiseMax(b_max) - lo;
  CounterRng rng(mc.seed, 0, 0);
  std::uint64_t both = 0, either = 0;
  for (std::uint64_t i = 0; i < mc.samples; ++i) {
    const Eigen::Vector3d p(lo.x() + span.x() * rng.Uniform(),
                            lo.y() + span.y() * rng.Uniform(),
                            lo.z() + span.z() * rng.Uniform());
    const bool in_a = ta.Contains(p);
    const bool in_b = tb.Contains(p);
    both += in_a && in_b;
    either += in_a || in_b;
  }
  if (either == 0) return 0.0;
  return std::clamp(static_cast<double>(both) / static_cast<double>(either),
                    0.0, 1.0);
}

struct PredRef {
  std::size_t index;  // into the caller's prediction list
  double best_iou;
  bool tp;
};

}  // namespace

OrientedBox3D::OrientedBox3D(const Eigen::Vector3d& center,
                             const Eigen::Vector3d& dims,
                             const Eigen::Quaterniond& rotation)
    : center_(center), dims_(dims), rotation_(CanonicalQuaternion(rotation)) {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(dims_[i]) || dims_[i] <= kMinDim) {
      throw Error(ErrorCode::kDegenerateBox,
                  "box dimension " + std::to_string(i) + " is <= 1e-9");
    }
  }
  if (!center_.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "box center must be finite");
  }
}

OrientedBox3D OrientedBox3D::Transformed(const Se3Pose& t) const {
  return OrientedBox3D(TransformPoint(t, center_), dims_,
                       t.rotation() * rotation_);
}

bool IsYawAligned(const OrientedBox3D& box, double tolerance) {
  return std::abs(box.rotation().x()) <= tolerance &&
         std::abs(box.rotation().y()) <= tolerance;
}

double Iou3d(const OrientedBox3D& a, const OrientedBox3D& b, IouMethod method,
             const MonteCarloOptions& mc) {
  const bool swap = BoxLess(b, a);
  const OrientedBox3D& first = swap ? b : a;
  const OrientedBox3D& second = swap ? a : b;
  if (method == IouMethod::kExactYaw) {
    if (!IsYawAligned(a) || !IsYawAligned(b)) {
      throw Error(ErrorCode::kNotYawAligned,
                  "exact IoU needs both boxes rotated about z only");
    }
    return ExactYawIou(first, second);
  }
  return MonteCarloIou(first, second, mc);
}

double Iou3dAuto(const OrientedBox3D& a, const OrientedBox3D& b,
                 const MonteCarloOptions& mc) {
  const bool exact = IsYawAligned(a) && IsYawAligned(b);
  return Iou3d(a, b, exact ? IouMethod::kExactYaw : IouMethod::kMonteCarlo, mc);
}

MatchResult MatchFromIou(const Eigen::MatrixXd& iou, double threshold) {
  const auto n_pred = static_cast<std::size_t>(iou.rows());
  const auto n_gt = static_cast<std::size_t>(iou.cols());
  MatchResult r;
  r.best_iou.assign(n_pred, 0.0);
  r.is_tp.assign(n_pred, false);
  r.matched_gt.assign(n_pred, std::nullopt);
  for (std::size_t i = 0; i < n_pred; ++i) {
    if (n_gt > 0) r.best_iou[i] = iou.row(static_cast<Eigen::Index>(i)).maxCoeff();
  }
  r.order.resize(n_pred);
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t x, std::size_t y) {
                     return r.best_iou[x] > r.best_iou[y];
                   });
  std::vector<bool> taken(n_gt, false);
  for (std::size_t i : r.order) {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < n_gt; ++j) {
      if (taken[j]) continue;
      if (!best || iou(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >
                       iou(static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(*best))) {
        best = j;
      }
    }
    if (best && iou(static_cast<Eigen::Index>(i),
                    static_cast<Eigen::Index>(*best)) >= threshold) {
      taken[*best] = true;
      r.is_tp[i] = true;
      r.matched_gt[i] = best;
    }
  }
  r.unmatched_gt = static_cast<std::size_t>(
      std::count(taken.begin(), taken.end(), false));
  return r;
}

MatchResult MatchDetections(std::span<const OrientedBox3D> preds,
                            std::span<const OrientedBox3D> gts,
                            double threshold) {
  Eigen::MatrixXd iou(preds.size(), gts.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      iou(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          Iou3dAuto(preds[i], gts[j]);
    }
  }
  return MatchFromIou(iou, threshold);
}

std::optional<double> AveragePrecision(const std::vector<bool>& labels,
                                       std::size_t n_gt) {
  if (n_gt == 0) {
    if (labels.empty()) return std::nullopt;
    return 0.0;
  }
  const std::size_t n = labels.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += labels[k] ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  // Precision envelope: best precision at any equal or higher recall.
  for (std::size_t k = n; k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (recall[k] > prev_recall) {
      ap += (recall[k] - prev_recall) * precision[k];
      prev_recall = recall[k];
    }
  }
  return ap;
}

EvalReport Evaluate(std::span<const Detection> preds,
                    std::span<const GroundTruth> gts, double threshold) {
  EvalReport report;
  report.threshold = threshold;

  // category key -> image id -> indices
  std::map<std::string, std::map<std::string, std::vector<std::size_t>>>
      gt_index, pred_index;
  for (std::size_t j = 0; j < gts.size(); ++j) {
    gt_index[CategoryKey(gts[j].category)][gts[j].image_id].push_back(j);
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].confidence != kFixedConfidence) {
      throw Error(ErrorCode::kInvalidArgument,
                  "detection confidence must be 1.0", i);
    }
    pred_index[CategoryKey(preds[i].category)][preds[i].image_id].push_back(i);
  }

  std::map<std::string, bool> categories;
  for (const auto& [key, _] : gt_index) categories[key] = true;
  for (const auto& [key, _] : pred_index) categories.emplace(key, false);

  for (const auto& [key, has_gt] : categories) {
    CategoryResult cat;
    cat.category = key;
    std::vector<PredRef> refs;
    std::map<std::string, std::vector<std::size_t>> empty;
    const auto& cat_gts = has_gt ? gt_index.at(key) : empty;
    const auto pred_it = pred_index.find(key);
    const auto& cat_preds = pred_it == pred_index.end() ? empty : pred_it->second;
    for (const auto& [image, idx] : cat_gts) cat.n_gt += idx.size();

    for (const auto& [image, p_idx] : cat_preds) {
      std::vector<OrientedBox3D> p_boxes, g_boxes;
      for (std::size_t i : p_idx) p_boxes.push_back(preds[i].box);
      if (const auto it = cat_gts.find(image); it != cat_gts.end()) {
        for (std::size_t j : it->second) g_boxes.push_back(gts[j].box);
      }
      const MatchResult m = MatchDetections(p_boxes, g_boxes, threshold);
      for (std::size_t k = 0; k < p_idx.size(); ++k) {
        refs.push_back({p_idx[k], m.best_iou[k], m.is_tp[k]});
      }
    }
    std::sort(refs.begin(), refs.end(), [](const PredRef& x, const PredRef& y) {
      return std::tie(y.best_iou, x.index) < std::tie(x.best_iou, y.index);
    });
    std::vector<bool> labels;
    labels.reserve(refs.size());
    for (const PredRef& r : refs) {
      labels.push_back(r.tp);
      cat.tp += r.tp ? 1 : 0;
    }
    cat.n_pred = refs.size();
    cat.fp = cat.n_pred - cat.tp;
    cat.fn = cat.n_gt - cat.tp;
    cat.ap = AveragePrecision(labels, cat.n_gt);
    report.per_category.emplace(key, std::move(cat));
  }

  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& [key, cat] : report.per_category) {
    if (cat.n_gt == 0) continue;
    sum += cat.ap.value_or(0.0);
    ++counted;
  }
  report.map = counted == 0 ? 0.0 : sum / static_cast<double>(counted);
  return report;
}

std::string ReportToJson(const EvalReport& report) {
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& [key, c] : report.per_category) {
    cats.push_back({{"category", c.category},
                    {"ap", c.ap ? nlohmann::json(*c.ap) : nlohmann::json()},
                    {"tp", c.tp},
                    {"fp", c.fp},
                    {"fn", c.fn},
                    {"n_gt", c.n_gt},
                    {"n_pred", c.n_pred}});
  }
  nlohmann::json j = {{"threshold", report.threshold},
                      {"map", report.map},
                      {"confidence", kFixedConfidence},
                      {"categories", std::move(cats)}};
  return j.dump(2);
}

PoseError PoseErrors(const Se3Pose& pred, const Se3Pose& gt) {
  PoseError e;
  e.translation = (pred.translation() - gt.translation()).norm();
  const double dot =
      std::min(1.0, std::abs(pred.rotation().coeffs().dot(gt.rotation().coeffs())));
  e.rotation = 2.0 * std::acos(dot);
  return e;
}

std::vector<GroundTruth> GroundTruthFromScene(const SceneRecord& scene) {
  std::vector<GroundTruth> out;
  for (std::size_t i = 0; i < scene.annotations.size(); ++i) {
    const Annotation& a = scene.annotations[i];
    if (!a.size) {
      throw Error(ErrorCode::kSchemaError,
                  "/annotations/" + std::to_string(i) +
                      "/size: required for evaluation");
    }
    out.push_back({scene.id, a.category,
                   OrientedBox3D(a.pose.translation(), *a.size,
                                 a.pose.rotation())});
  }
  return out;
}

std::vector<Detection> DetectionsFromScene(const SceneRecord& scene) {
  std::vector<Detection> out;
  for (GroundTruth& g : GroundTruthFromScene(scene)) {
    out.push_back({std::move(g.image_id), std::move(g.category), g.box,
                   kFixedConfidence});
  }
  return out;
}

}  // namespace posekit
