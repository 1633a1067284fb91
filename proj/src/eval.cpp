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

#include "vloc/eval.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "vloc/errors.hpp"

namespace vloc {

ErrorRecord decompose_error(const Pose3& est, const Pose3& gt) {
  ErrorRecord rec;
  const double ex = est.position.x() - gt.position.x();
  const double ey = est.position.y() - gt.position.y();
  rec.horizontal = std::hypot(ex, ey);

  const double heading = gt.heading();
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  rec.longitudinal = c * ex + s * ey;       // along heading
  rec.lateral = -s * ex + c * ey;           // +left of heading
  rec.yaw_deg = wrap_angle(est.heading() - heading) * 180.0 / M_PI;
  return rec;
}

MetricsSummary summarize(const std::vector<ErrorRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("summarize: no records");

  MetricsSummary s;
  s.frame_count = static_cast<int>(records.size());

  double sq_h = 0.0, sq_lon = 0.0, sq_lat = 0.0, sq_yaw = 0.0;
  std::array<int, 3> under_h = {0, 0, 0};
  std::array<int, 3> under_yaw = {0, 0, 0};
  for (const ErrorRecord& r : records) {
    if (!r.available) continue;
    ++s.available_count;
    sq_h += r.horizontal * r.horizontal;
    sq_lon += r.longitudinal * r.longitudinal;
    sq_lat += r.lateral * r.lateral;
    sq_yaw += r.yaw_deg * r.yaw_deg;
    s.max_horizontal = std::max(s.max_horizontal, std::abs(r.horizontal));
    s.max_longitudinal = std::max(s.max_longitudinal, std::abs(r.longitudinal));
    s.max_lateral = std::max(s.max_lateral, std::abs(r.lateral));
    s.max_yaw_deg = std::max(s.max_yaw_deg, std::abs(r.yaw_deg));
    for (std::size_t i = 0; i < kHorizontalThresholds.size(); ++i)
      if (std::abs(r.horizontal) <= kHorizontalThresholds[i]) ++under_h[i];
    for (std::size_t i = 0; i < kYawThresholdsDeg.size(); ++i)
      if (std::abs(r.yaw_deg) <= kYawThresholdsDeg[i]) ++under_yaw[i];
  }

  s.available_percent = 100.0 * s.available_count / s.frame_count;
  s.na_percent = 100.0 - s.available_percent;
  if (s.available_count == 0) return s;  // metrics marked absent

  s.has_metrics = true;
  const double n = s.available_count;
  s.rms_horizontal = std::sqrt(sq_h / n);
  s.rms_longitudinal = std::sqrt(sq_lon / n);
  s.rms_lateral = std::sqrt(sq_lat / n);
  s.rms_yaw_deg = std::sqrt(sq_yaw / n);
  for (std::size_t i = 0; i < under_h.size(); ++i) {
    s.pct_horizontal_under[i] = 100.0 * under_h[i] / n;
    s.pct_yaw_under[i] = 100.0 * under_yaw[i] / n;
  }
  return s;
}

void save_results_csv(const std::vector<ErrorRecord>& records,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write results: " + path.string());
  out << "timestamp,available,horizontal,longitudinal,lateral,yaw_deg\n";
  out.precision(17);
  for (const ErrorRecord& r : records)
    out << r.timestamp << ',' << (r.available ? 1 : 0) << ',' << r.horizontal
        << ',' << r.longitudinal << ',' << r.lateral << ',' << r.yaw_deg
        << '\n';
}

std::vector<ErrorRecord> load_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open results: " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("timestamp,available,horizontal", 0) != 0)
    throw FormatError(path.string() + ": missing results header");

  std::vector<ErrorRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> row;
    while (std::getline(ss, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": bad number \"" + field + "\"");
      }
    }
    if (row.size() != 6)
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        std::to_string(row.size()) + " fields, expected 6");
    ErrorRecord r;
    r.timestamp = row[0];
    r.available = row[1] != 0.0;
    r.horizontal = row[2];
    r.longitudinal = row[3];
    r.lateral = row[4];
    r.yaw_deg = row[5];
    records.push_back(r);
  }
  return records;
}

std::string summary_to_json(const MetricsSummary& s) {
  nlohmann::json j;
  j["frame_count"] = s.frame_count;
  j["available_count"] = s.available_count;
  j["available_percent"] = s.available_percent;
  j["na_percent"] = s.na_percent;
  j["has_metrics"] = s.has_metrics;
  if (s.has_metrics) {
    j["horizontal"] = {{"rms", s.rms_horizontal}, {"max", s.max_horizontal}};
    j["longitudinal"] = {{"rms", s.rms_longitudinal}, {"max", s.max_longitudinal}};
    j["lateral"] = {{"rms", s.rms_lateral}, {"max", s.max_lateral}};
    j["yaw_deg"] = {{"rms", s.rms_yaw_deg}, {"max", s.max_yaw_deg}};
    j["pct_horizontal_under"] = {{"0.1", s.pct_horizontal_under[0]},
                                 {"0.2", s.pct_horizontal_under[1]},
                                 {"0.3", s.pct_horizontal_under[2]}};
    j["pct_yaw_under"] = {{"0.1", s.pct_yaw_under[0]},
                          {"0.3", s.pct_yaw_under[1]},
                          {"0.6", s.pct_yaw_under[2]}};
  }
  return j.dump(2);
}

std::string summary_table(const MetricsSummary& s) {
  std::ostringstream out;
  out << std::fixed;
  out << "frames: " << s.frame_count << "  available: " << s.available_count
      << " (" << std::setprecision(1) << s.available_percent
      << "%, N/A " << s.na_percent << "%)\n";
  if (!s.has_metrics) {
    out << "no available frames; error metrics absent\n";
    return out.str();
  }
  out << std::setprecision(3);
  out << "                 RMS      Max     <=0.1   <=0.2   <=0.3\n";
  out << "horizontal   " << std::setw(7) << s.rms_horizontal << "  " << std::setw(7)
      << s.max_horizontal << "   " << std::setprecision(1) << std::setw(5)
      << s.pct_horizontal_under[0] << "%  " << std::setw(5)
      << s.pct_horizontal_under[1] << "%  " << std::setw(5)
      << s.pct_horizontal_under[2] << "%\n"
      << std::setprecision(3);
  out << "longitudinal " << std::setw(7) << s.rms_longitudinal << "  "
      << std::setw(7) << s.max_longitudinal << "\n";
  out << "lateral      " << std::setw(7) << s.rms_lateral << "  " << std::setw(7)
      << s.max_lateral << "\n";
  out << "                 RMS      Max     <=0.1   <=0.3   <=0.6\n";
  out << "yaw (deg)    " << std::setw(7) << s.rms_yaw_deg << "  " << std::setw(7)
      << s.max_yaw_deg << "   " << std::setprecision(1) << std::setw(5)
      << s.pct_yaw_under[0] << "%  " << std::setw(5) << s.pct_yaw_under[1]
      << "%  " << std::setw(5) << s.pct_yaw_under[2] << "%\n";
  return out.str();
}

}  // namespace vloc
