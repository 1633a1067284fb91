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

#include "vloc/geometry.hpp"

#include <cmath>

namespace vloc {

double wrap_angle(double radians) {
  double r = std::fmod(radians + M_PI, 2.0 * M_PI);
  if (r <= 0.0) r += 2.0 * M_PI;
  return r - M_PI;
}

PoseSE2Offset PoseSE2Offset::inverse() const {
  const double c = std::cos(dpsi);
  const double s = std::sin(dpsi);
  // -R(dpsi)^T * (dx, dy)
  return PoseSE2Offset(-(c * dx + s * dy), -(-s * dx + c * dy), -dpsi);
}

double Pose3::heading() const {
  const Eigen::Quaterniond& q = orientation;
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()),
                    1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

Pose3 Pose3::compose(const Pose3& other) const {
  Pose3 out;
  out.position = position + orientation * other.position;
  out.orientation = (orientation * other.orientation).normalized();
  return out;
}

Pose3 Pose3::inverse() const {
  Pose3 out;
  out.orientation = orientation.conjugate();
  out.position = -(out.orientation * position);
  return out;
}

Eigen::Vector3d Pose3::transform(const Eigen::Vector3d& p_body) const {
  return position + orientation * p_body;
}

Eigen::Vector3d Pose3::inverse_transform(const Eigen::Vector3d& p_world) const {
  return orientation.conjugate() * (p_world - position);
}

bool Pose3::is_normalized(double tol) const {
  return std::abs(orientation.norm() - 1.0) <= tol;
}

Eigen::Quaterniond yaw_quaternion(double angle) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()));
}

Pose3 apply_offset(const Pose3& anchor, const PoseSE2Offset& offset) {
  const double psi = anchor.heading();
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  Pose3 out;
  out.position = anchor.position + Eigen::Vector3d(c * offset.dx - s * offset.dy,
                                                   s * offset.dx + c * offset.dy,
                                                   0.0);
  out.orientation = (yaw_quaternion(offset.dpsi) * anchor.orientation).normalized();
  return out;
}

std::optional<Projection> project_point(const Eigen::Vector3d& p,
                                        const Pose3& vehicle_pose,
                                        const CameraModel& cam) {
  const Pose3 camera_world = vehicle_pose.compose(cam.extrinsic);
  const Eigen::Vector3d pc = camera_world.inverse_transform(p);
  if (pc.z() <= kMinProjectionDepth) return std::nullopt;
  const double u = cam.fx * pc.x() / pc.z() + cam.cx;
  const double v = cam.fy * pc.y() / pc.z() + cam.cy;
  if (u < 0.0 || u >= cam.width || v < 0.0 || v >= cam.height)
    return std::nullopt;
  return Projection{u, v, pc.z()};
}

}  // namespace vloc
