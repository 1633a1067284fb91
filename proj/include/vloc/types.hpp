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

#include <Eigen/Core>

namespace vloc {

/// Dimensionality of all local feature descriptors in the system.
inline constexpr int kDescriptorDim = 8;

/// Descriptors are stored in single precision (matching the on-disk
/// formats); cost arithmetic promotes to double.
using Descriptor = Eigen::Matrix<float, kDescriptorDim, 1>;
using DescriptorD = Eigen::Matrix<double, kDescriptorDim, 1>;

using Vec3 = Eigen::Vector3d;

}  // namespace vloc
