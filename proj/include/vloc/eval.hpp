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

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "vloc/geometry.hpp"

namespace vloc {

/// Per-frame localization error. Longitudinal/lateral are the horizontal
/// error rotated into the ground-truth heading frame (lateral positive to
/// the left); summaries use their magnitudes.
struct ErrorRecord {
  double timestamp = 0.0;
  bool available = true;
  double horizontal = 0.0;    // meters
  double longitudinal = 0.0;  // meters, along gt heading
  double lateral = 0.0;       // meters, signed (+left)
  double yaw_deg = 0.0;       // degrees, signed wrapped difference
};

inline constexpr std::array<double, 3> kHorizontalThresholds = {0.1, 0.2, 0.3};
inline constexpr std::array<double, 3> kYawThresholdsDeg = {0.1, 0.3, 0.6};

/// Aggregate metrics over a run. Only available frames feed the error
/// statistics; `has_metrics` is false when none were available. Threshold
/// percentages count |error| <= threshold among available frames.
struct MetricsSummary {
  int frame_count = 0;
  int available_count = 0;
  double available_percent = 0.0;
  double na_percent = 100.0;
  bool has_metrics = false;

  double rms_horizontal = 0.0, max_horizontal = 0.0;
  double rms_longitudinal = 0.0, max_longitudinal = 0.0;
  double rms_lateral = 0.0, max_lateral = 0.0;
  double rms_yaw_deg = 0.0, max_yaw_deg = 0.0;
  std::array<double, 3> pct_horizontal_under = {0.0, 0.0, 0.0};
  std::array<double, 3> pct_yaw_under = {0.0, 0.0, 0.0};
};

/// Decompose the planar error of `est` against `gt`: horizontal norm,
/// longitudinal along the ground-truth heading, lateral perpendicular
/// (positive left) and the wrapped yaw difference in degrees. Timestamp
/// and availability are left for the caller.
ErrorRecord decompose_error(const Pose3& est, const Pose3& gt);

/// Summarize a run. Throws std::invalid_argument on an empty list.
MetricsSummary summarize(const std::vector<ErrorRecord>& records);

/// Results CSV: "timestamp,available,horizontal,longitudinal,lateral,yaw_deg".
void save_results_csv(const std::vector<ErrorRecord>& records,
                      const std::filesystem::path& path);
std::vector<ErrorRecord> load_results_csv(const std::filesystem::path& path);

/// Machine-readable summary (JSON object, stable field names).
std::string summary_to_json(const MetricsSummary& summary);

/// Fixed-width human-readable table.
std::string summary_table(const MetricsSummary& summary);

}  // namespace vloc
