// Copyright 2026 The vloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "vloc/types.hpp"

namespace vloc {

// Conventions used throughout: right-handed world frame with z up,
// heading psi measured counter-clockwise from +x. Vehicle frame: x
// forward, y left, z up. Camera frame: x right, y down, z forward
// (optical axis).

/// Wrap an angle to (-pi, pi].
double wrap_angle(double radians);

/// Planar search offset riding on a 6-DoF anchor pose: (dx, dy) in the
/// anchor's horizontal frame, dpsi about the world-vertical axis.
struct PoseSE2Offset {
  double dx = 0.0;
  double dy = 0.0;
  double dpsi = 0.0;  // wrapped to (-pi, pi]

  PoseSE2Offset() = default;
  PoseSE2Offset(double dx_, double dy_, double dpsi_)
      : dx(dx_), dy(dy_), dpsi(wrap_angle(dpsi_)) {}

  /// SE(2) group inverse: applying an offset and then its inverse is the
  /// identity. Note this is not component-wise negation unless dpsi == 0.
  PoseSE2Offset inverse() const;
};

/// 6-DoF pose, world-from-body. Orientation is a unit quaternion.
struct Pose3 {
  Eigen::Vector3d position{0.0, 0.0, 0.0};
  Eigen::Quaterniond orientation{1.0, 0.0, 0.0, 0.0};

  static Pose3 identity() { return Pose3{}; }

  /// Yaw of the body x axis, CCW from world +x (ZYX convention).
  double heading() const;

  /// this * other, i.e. other expressed in this pose's frame.
  Pose3 compose(const Pose3& other) const;
  Pose3 inverse() const;

  /// Body coordinates -> world coordinates.
  Eigen::Vector3d transform(const Eigen::Vector3d& p_body) const;
  /// World coordinates -> body coordinates.
  Eigen::Vector3d inverse_transform(const Eigen::Vector3d& p_world) const;

  bool is_normalized(double tol = 1e-9) const;
};

/// Pinhole camera intrinsics plus the vehicle-from-camera extrinsic.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Pose3 extrinsic;  // vehicle-from-camera

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && cx >= 0.0 && cx < width && cy >= 0.0 &&
           cy < height;
  }
};

struct Projection {
  double u = 0.0;      // pixels, full-resolution image
  double v = 0.0;      // pixels
  double depth = 0.0;  // meters along the optical axis, > 0
};

/// Points closer than this to the camera plane are treated as not visible.
inline constexpr double kMinProjectionDepth = 0.1;

/// Compose `anchor` with a planar offset: rotate by dpsi about the world
/// vertical and translate (dx, dy, 0) expressed in the anchor's horizontal
/// (heading-aligned) frame. Vertical position, roll and pitch are
/// unchanged; the result's heading is anchor.heading() + dpsi.
Pose3 apply_offset(const Pose3& anchor, const PoseSE2Offset& offset);

/// Pinhole projection of world point `p` into the camera mounted on a
/// vehicle at `vehicle_pose` (camera world pose = vehicle_pose *
/// cam.extrinsic). Empty when the point is behind the camera
/// (depth <= kMinProjectionDepth) or lands outside [0,width)x[0,height).
std::optional<Projection> project_point(const Eigen::Vector3d& p,
                                        const Pose3& vehicle_pose,
                                        const CameraModel& cam);

/// Quaternion for a rotation of `angle` about the world z axis.
Eigen::Quaterniond yaw_quaternion(double angle);

}  // namespace vloc
