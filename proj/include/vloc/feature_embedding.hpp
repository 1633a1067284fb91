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
#include <cstdint>
#include <filesystem>
#include <vector>

#include "vloc/types.hpp"

namespace vloc {

/// Pyramid scale factors, coarsest last. Each level has one cell per
/// scale x scale pixel block of the source image.
inline constexpr std::array<int, 3> kPyramidScales = {2, 4, 8};

/// Dense per-scale descriptor map plus attention heatmap for one image.
///
/// Cell (u, v) of a level corresponds to the pixel block
/// [u*scale, (u+1)*scale) x [v*scale, (v+1)*scale) of the source image;
/// continuous level coordinates are full-resolution pixels divided by
/// `scale`.
struct DenseFeatureLevel {
  int scale = 2;   // one of kPyramidScales
  int width = 0;   // cells (= image width / scale, floored)
  int height = 0;  // cells
  std::vector<float> descriptors;  // [v][u][d], row-major, size h*w*D
  std::vector<float> heatmap;      // [v][u], values in [0, 1]

  float heat_at(int u, int v) const {
    return heatmap[static_cast<size_t>(v) * width + u];
  }
  const float* desc_at(int u, int v) const {
    return descriptors.data() +
           (static_cast<size_t>(v) * width + u) * kDescriptorDim;
  }
  float* desc_at(int u, int v) {
    return descriptors.data() +
           (static_cast<size_t>(v) * width + u) * kDescriptorDim;
  }
  /// True when (u, v) is inside the bilinear-samplable region
  /// [0, width-1] x [0, height-1].
  bool in_bounds(double u, double v) const {
    return u >= 0.0 && u <= width - 1 && v >= 0.0 && v <= height - 1;
  }
};

/// Three DenseFeatureLevel entries at scales 2, 4, 8 over one image.
struct FeaturePyramid {
  int image_width = 0;
  int image_height = 0;
  std::array<DenseFeatureLevel, 3> levels;  // ascending scale 2, 4, 8

  const DenseFeatureLevel& level_for_scale(int scale) const;
  DenseFeatureLevel& level_for_scale(int scale);
};

/// Grayscale or RGB raster with float pixels in [0, 1], row-major [v][u][c].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 or 3
  std::vector<float> pixels;

  float intensity(int u, int v) const;
};

/// Build the three-level pyramid with the built-in deterministic extractor.
///
/// Per cell the descriptor packs the mean intensity, four directional
/// gradient responses and three local-contrast statistics of the cell's
/// pixel block, L2-normalized (flat patches map to the zero vector). The
/// heatmap is the block's mean squared gradient magnitude, normalized per
/// level to [0, 1]; an all-zero map stays all-zero.
///
/// Throws SizeError for images smaller than 16x16.
FeaturePyramid extract_pyramid(const Image& image);

/// Bilinear blend of the four descriptor cells around (u, v), in the
/// level's own coordinates. Exact cell value at integer coordinates.
/// Throws std::out_of_range outside [0, width-1] x [0, height-1].
Descriptor bilinear_sample(const DenseFeatureLevel& level, double u, double v);

/// Same blend in double precision (used on the matching hot path).
DescriptorD bilinear_sample_d(const DenseFeatureLevel& level, double u,
                              double v);

/// Bilinear blend of the heatmap at (u, v). Same domain as bilinear_sample.
double bilinear_sample_heat(const DenseFeatureLevel& level, double u, double v);

/// Read a pyramid tensor file (magic "ALFP"). Validates dimensions,
/// heatmap range and finiteness; throws FormatError naming the offending
/// field. A failed import never returns a partial pyramid.
FeaturePyramid import_pyramid(const std::filesystem::path& path);

/// Write the pyramid tensor file. Replaces an existing file atomically
/// (write to temp + rename). Throws FormatError on unwritable paths or
/// empty levels.
void export_pyramid(const FeaturePyramid& pyramid,
                    const std::filesystem::path& path);

}  // namespace vloc
