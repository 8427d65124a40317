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

#include "posekit/geometry.h"

#include <cmath>

#include "posekit/error.h"

namespace posekit {
namespace {

constexpr double kTwoPi = 2.0 * kPi;
// |sin(pitch)| at or above this is treated as gimbal lock.
constexpr double kGimbalLockSine = 1.0 - 1e-14;

bool AllFinite(const Eigen::Vector3d& v) { return v.allFinite(); }

}  // namespace

double WrapAngle(double radians) {
  if (radians >= -kPi && radians < kPi) return radians;
  double r = std::fmod(radians + kPi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  double wrapped = r - kPi;
  if (wrapped >= kPi) wrapped -= kTwoPi;
  if (wrapped < -kPi) wrapped = -kPi;
  return wrapped;
}

Eigen::Quaterniond CanonicalQuaternion(const Eigen::Quaterniond& q) {
  const double norm = q.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kInvalidArgument,
                "quaternion must have finite nonzero norm");
  }
  Eigen::Quaterniond out(q.w() / norm, q.x() / norm, q.y() / norm,
                         q.z() / norm);
  bool flip = out.w() < 0.0;
  if (out.w() == 0.0) {
    if (out.x() != 0.0) {
      flip = out.x() < 0.0;
    } else if (out.y() != 0.0) {
      flip = out.y() < 0.0;
    } else {
      flip = out.z() < 0.0;
    }
  }
  if (flip) out.coeffs() = -out.coeffs();
  // Normalizing -0.0 components keeps comparisons well defined.
  for (int i = 0; i < 4; ++i) {
    if (out.coeffs()[i] == 0.0) out.coeffs()[i] = 0.0;
  }
  return out;
}

Se3Pose::Se3Pose()
    : translation_(Eigen::Vector3d::Zero()),
      rotation_(Eigen::Quaterniond::Identity()) {}

Se3Pose::Se3Pose(const Eigen::Vector3d& translation,
                 const Eigen::Quaterniond& rotation)
    : translation_(translation), rotation_(CanonicalQuaternion(rotation)) {
  if (!AllFinite(translation_)) {
    throw Error(ErrorCode::kInvalidArgument, "pose translation must be finite");
  }
}

Se3Pose Se3Pose::Translation(double x, double y, double z) {
  return Se3Pose(Eigen::Vector3d(x, y, z), Eigen::Quaterniond::Identity());
}

CameraIntrinsics::CameraIntrinsics(double fx, double fy, double cx, double cy,
                                   int width, int height)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height) {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw Error(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "image dimensions must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::kInvalidArgument,
                "principal point must lie inside the image");
  }
}

Se3Pose Compose(const Se3Pose& a, const Se3Pose& b) {
  return Se3Pose(a.rotation() * b.translation() + a.translation(),
                 a.rotation() * b.rotation());
}

Se3Pose Invert(const Se3Pose& p) {
  const Eigen::Quaterniond inv = p.rotation().conjugate();
  return Se3Pose(-(inv * p.translation()), inv);
}

Eigen::Vector3d TransformPoint(const Se3Pose& p, const Eigen::Vector3d& x) {
  return p.RotationMatrix() * x + p.translation();
}

Eigen::Quaterniond EulerToQuat(const EulerAngles& e) {
  const double cr = std::cos(0.5 * e.roll), sr = std::sin(0.5 * e.roll);
  const double cp = std::cos(0.5 * e.pitch), sp = std::sin(0.5 * e.pitch);
  const double cy = std::cos(0.5 * e.yaw), sy = std::sin(0.5 * e.yaw);
  return CanonicalQuaternion(Eigen::Quaterniond(
      cr * cp * cy + sr * sp * sy, sr * cp * cy - cr * sp * sy,
      cr * sp * cy + sr * cp * sy, cr * cp * sy - sr * sp * cy));
}

EulerAngles QuatToEuler(const Eigen::Quaterniond& q_in) {
  const Eigen::Quaterniond q = CanonicalQuaternion(q_in);
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double sin_pitch = 2.0 * (w * y - z * x);
  EulerAngles e;
  if (std::abs(sin_pitch) >= kGimbalLockSine) {
    // Only yaw - roll (or yaw + roll) is observable; assign it to yaw.
    e.pitch = std::copysign(0.5 * kPi, sin_pitch);
    e.roll = 0.0;
    e.yaw = WrapAngle(2.0 * std::atan2(z, w));
    return e;
  }
  e.roll = WrapAngle(std::atan2(2.0 * (w * x + y * z),
                                1.0 - 2.0 * (x * x + y * y)));
  e.pitch = std::asin(sin_pitch);
  e.yaw = WrapAngle(std::atan2(2.0 * (w * z + x * y),
                               1.0 - 2.0 * (y * y + z * z)));
  return e;
}

Eigen::Quaterniond Slerp(const Eigen::Quaterniond& a,
                         const Eigen::Quaterniond& b, double alpha) {
  if (alpha <= 0.0) return CanonicalQuaternion(a);
  if (alpha >= 1.0) return CanonicalQuaternion(b);
  Eigen::Vector4d va = a.coeffs().normalized();
  Eigen::Vector4d vb = b.coeffs().normalized();
  double dot = va.dot(vb);
  if (dot < 0.0) {
    vb = -vb;
    dot = -dot;
  }
  Eigen::Vector4d out;
  if (dot > 1.0 - 1e-12) {
    out = (1.0 - alpha) * va + alpha * vb;
  } else {
    const double theta = std::acos(dot);
    const double inv_sin = 1.0 / std::sin(theta);
    out = std::sin((1.0 - alpha) * theta) * inv_sin * va +
          std::sin(alpha * theta) * inv_sin * vb;
  }
  Eigen::Quaterniond q;
  q.coeffs() = out;
  return CanonicalQuaternion(q);
}

Eigen::Vector3d ComputeRay(const CameraIntrinsics& k, double u, double v) {
  return Eigen::Vector3d((u - k.cx()) / k.fx(), (v - k.cy()) / k.fy(), 1.0);
}

DenseField Raymap(const CameraIntrinsics& k) {
  DenseField field(k.height(), k.width(), 3);
  for (int v = 0; v < k.height(); ++v) {
    for (int u = 0; u < k.width(); ++u) {
      const Eigen::Vector3d ray = ComputeRay(k, u + 0.5, v + 0.5);
      field.at(v, u, 0) = ray.x();
      field.at(v, u, 1) = ray.y();
      field.at(v, u, 2) = ray.z();
    }
  }
  return field;
}

Se3Pose BaseToCamera(const Se3Pose& pose_in_base, const CameraExtrinsics& ext) {
  return Compose(ext.pose_of_base_in_camera, pose_in_base);
}

Se3Pose CameraToBase(const Se3Pose& pose_in_camera,
                     const CameraExtrinsics& ext) {
  return Compose(Invert(ext.pose_of_base_in_camera), pose_in_camera);
}

}  // namespace posekit
