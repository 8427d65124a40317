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

// Rigid-body math and the pinhole camera model.
//
// Conventions:
//  * Quaternions are stored (w, x, y, z), unit norm, with the double cover
//    canonicalized to w >= 0 (ties at w == 0 broken by making the first
//    nonzero of x, y, z positive). Two poses describing the same rotation
//    therefore compare equal componentwise.
//  * Euler angles are intrinsic Z-Y-X: R = Rz(yaw) * Ry(pitch) * Rx(roll).
//    All angles live in [-pi, pi). At gimbal lock (|pitch| = pi/2) roll is 0
//    and the whole in-plane rotation is carried by yaw.
//  * Camera frame follows the pinhole model: a ray through pixel (u, v) is
//    K^-1 [u, v, 1]^T, left unnormalized so that z == 1.

#ifndef POSEKIT_GEOMETRY_H_
#define POSEKIT_GEOMETRY_H_

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "posekit/field.h"

namespace posekit {

inline constexpr double kPi = 3.14159265358979323846;

// Wraps an angle into [-pi, pi).
double WrapAngle(double radians);

// Returns the canonical representative of q: normalized, w >= 0.
Eigen::Quaterniond CanonicalQuaternion(const Eigen::Quaterniond& q);

class Se3Pose {
 public:
  Se3Pose();
  // Normalizes and canonicalizes `rotation`.
  Se3Pose(const Eigen::Vector3d& translation,
          const Eigen::Quaterniond& rotation);

  static Se3Pose Identity() { return Se3Pose(); }
  static Se3Pose Translation(double x, double y, double z);

  const Eigen::Vector3d& translation() const noexcept { return translation_; }
  const Eigen::Quaterniond& rotation() const noexcept { return rotation_; }
  Eigen::Matrix3d RotationMatrix() const { return rotation_.toRotationMatrix(); }

  friend bool operator==(const Se3Pose& a, const Se3Pose& b) {
    return a.translation_ == b.translation_ &&
           a.rotation_.coeffs() == b.rotation_.coeffs();
  }

 private:
  Eigen::Vector3d translation_;
  Eigen::Quaterniond rotation_;
};

struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

// Pinhole intrinsics. Construction validates fx, fy > 0 and the principal
// point inside [0, width) x [0, height).
class CameraIntrinsics {
 public:
  CameraIntrinsics(double fx, double fy, double cx, double cy, int width,
                   int height);

  double fx() const noexcept { return fx_; }
  double fy() const noexcept { return fy_; }
  double cx() const noexcept { return cx_; }
  double cy() const noexcept { return cy_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  friend bool operator==(const CameraIntrinsics&,
                         const CameraIntrinsics&) = default;

 private:
  double fx_, fy_, cx_, cy_;
  int width_, height_;
};

// Transform taking base-frame coordinates to camera-frame coordinates.
struct CameraExtrinsics {
  Se3Pose pose_of_base_in_camera;
};

// Applies b first, then a.
Se3Pose Compose(const Se3Pose& a, const Se3Pose& b);
Se3Pose Invert(const Se3Pose& p);
Eigen::Vector3d TransformPoint(const Se3Pose& p, const Eigen::Vector3d& x);

Eigen::Quaterniond EulerToQuat(const EulerAngles& e);
EulerAngles QuatToEuler(const Eigen::Quaterniond& q);

// Shortest-arc spherical interpolation; alpha in [0, 1]. Result canonical.
Eigen::Quaterniond Slerp(const Eigen::Quaterniond& a,
                         const Eigen::Quaterniond& b, double alpha);

// ((u - cx) / fx, (v - cy) / fy, 1). u and v are continuous and may lie
// outside the image.
Eigen::Vector3d ComputeRay(const CameraIntrinsics& k, double u, double v);

// H x W x 3 field; element (v, u) is ComputeRay(k, u + 0.5, v + 0.5).
DenseField Raymap(const CameraIntrinsics& k);

Se3Pose BaseToCamera(const Se3Pose& pose_in_base, const CameraExtrinsics& ext);
Se3Pose CameraToBase(const Se3Pose& pose_in_camera,
                     const CameraExtrinsics& ext);

}  // namespace posekit

#endif  // POSEKIT_GEOMETRY_H_
