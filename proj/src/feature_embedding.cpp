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

#include "vloc/feature_embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vloc/errors.hpp"
#include "detail/binary_io.hpp"

namespace vloc {

namespace {

constexpr std::uint16_t kPyramidFormatVersion = 1;
constexpr const char kPyramidMagic[4] = {'A', 'L', 'F', 'P'};

std::string cell_name(int level_index, int scale, int u, int v) {
  return "level " + std::to_string(level_index) + " (scale " +
         std::to_string(scale) + ") cell (u=" + std::to_string(u) +
         ", v=" + std::to_string(v) + ")";
}

}  // namespace

const DenseFeatureLevel& FeaturePyramid::level_for_scale(int scale) const {
  for (const auto& l : levels)
    if (l.scale == scale) return l;
  throw std::invalid_argument("no pyramid level with scale " +
                              std::to_string(scale));
}

DenseFeatureLevel& FeaturePyramid::level_for_scale(int scale) {
  for (auto& l : levels)
    if (l.scale == scale) return l;
  throw std::invalid_argument("no pyramid level with scale " +
                              std::to_string(scale));
}

float Image::intensity(int u, int v) const {
  const float* px = pixels.data() + (static_cast<size_t>(v) * width + u) * channels;
  if (channels == 1) return px[0];
  return (px[0] + px[1] + px[2]) / 3.0f;
}

FeaturePyramid extract_pyramid(const Image& image) {
  if (image.width < 16 || image.height < 16)
    throw SizeError("image too small for extraction: " +
                    std::to_string(image.width) + "x" +
                    std::to_string(image.height) + " (minimum 16x16)");
  if (image.channels != 1 && image.channels != 3)
    throw SizeError("unsupported channel count " +
                    std::to_string(image.channels));

  const int w = image.width;
  const int h = image.height;

  // Full-resolution intensity and central-difference gradients (edges
  // clamped). Per-cell statistics aggregate over the cell's pixel block,
  // which keeps level outputs covariant under shifts of whole blocks.
  std::vector<float> gray(static_cast<size_t>(w) * h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      gray[static_cast<size_t>(v) * w + u] = image.intensity(u, v);

  auto at = [&](int u, int v) -> float {
    u = std::clamp(u, 0, w - 1);
    v = std::clamp(v, 0, h - 1);
    return gray[static_cast<size_t>(v) * w + u];
  };

  std::vector<float> gx(gray.size()), gy(gray.size()), gd1(gray.size()),
      gd2(gray.size());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const size_t i = static_cast<size_t>(v) * w + u;
      gx[i] = 0.5f * (at(u + 1, v) - at(u - 1, v));
      gy[i] = 0.5f * (at(u, v + 1) - at(u, v - 1));
      // Diagonal responses, normalized to the same step length.
      gd1[i] = 0.5f * (at(u + 1, v + 1) - at(u - 1, v - 1)) * 0.70710678f;
      gd2[i] = 0.5f * (at(u + 1, v - 1) - at(u - 1, v + 1)) * 0.70710678f;
    }
  }

  FeaturePyramid pyramid;
  pyramid.image_width = w;
  pyramid.image_height = h;

  for (size_t li = 0; li < kPyramidScales.size(); ++li) {
    const int s = kPyramidScales[li];
    DenseFeatureLevel& level = pyramid.levels[li];
    level.scale = s;
    level.width = w / s;
    level.height = h / s;
    level.descriptors.assign(
        static_cast<size_t>(level.width) * level.height * kDescriptorDim, 0.0f);
    level.heatmap.assign(static_cast<size_t>(level.width) * level.height, 0.0f);

    float heat_max = 0.0f;
    for (int cv = 0; cv < level.height; ++cv) {
      for (int cu = 0; cu < level.width; ++cu) {
        double sum_i = 0.0, sum_gx = 0.0, sum_gy = 0.0, sum_d1 = 0.0,
               sum_d2 = 0.0, sum_sq = 0.0, sum_energy = 0.0, sum_abs_g = 0.0;
        float lo = 1.0f, hi = 0.0f;
        for (int pv = cv * s; pv < (cv + 1) * s; ++pv) {
          for (int pu = cu * s; pu < (cu + 1) * s; ++pu) {
            const size_t i = static_cast<size_t>(pv) * w + pu;
            const float g = gray[i];
            sum_i += g;
            sum_sq += static_cast<double>(g) * g;
            sum_gx += gx[i];
            sum_gy += gy[i];
            sum_d1 += gd1[i];
            sum_d2 += gd2[i];
            sum_energy += static_cast<double>(gx[i]) * gx[i] +
                          static_cast<double>(gy[i]) * gy[i];
            sum_abs_g += std::abs(gx[i]) + std::abs(gy[i]);
            lo = std::min(lo, g);
            hi = std::max(hi, g);
          }
        }
        const double n = static_cast<double>(s) * s;
        const double mean = sum_i / n;
        const double variance = std::max(0.0, sum_sq / n - mean * mean);

        DescriptorD d;
        d << mean, sum_gx / n, sum_gy / n, sum_d1 / n, sum_d2 / n,
            std::sqrt(variance), sum_abs_g / n,
            static_cast<double>(hi) - static_cast<double>(lo);
        const double norm = d.norm();
        float* out = level.desc_at(cu, cv);
        if (norm > 0.0) {
          for (int k = 0; k < kDescriptorDim; ++k)
            out[k] = static_cast<float>(d[k] / norm);
        }
        const float energy = static_cast<float>(sum_energy / n);
        level.heatmap[static_cast<size_t>(cv) * level.width + cu] = energy;
        heat_max = std::max(heat_max, energy);
      }
    }
    if (heat_max > 0.0f)
      for (float& hcell : level.heatmap) hcell /= heat_max;
  }
  return pyramid;
}

namespace {

// Shared bilinear kernel over one channel-strided plane.
template <int Stride>
void bilinear_accumulate(const float* base, int width, int height, double u,
                         double v, double* out) {
  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const double a = u - u0;
  const double b = v - v0;
  const bool has_u1 = a > 0.0 && u0 + 1 < width;
  const bool has_v1 = b > 0.0 && v0 + 1 < height;

  auto cell = [&](int uu, int vv) {
    return base + (static_cast<size_t>(vv) * width + uu) * Stride;
  };

  const double w00 = (1.0 - a) * (1.0 - b);
  const double w10 = a * (1.0 - b);
  const double w01 = (1.0 - a) * b;
  const double w11 = a * b;

  const float* c00 = cell(u0, v0);
  for (int k = 0; k < Stride; ++k) out[k] = w00 * c00[k];
  if (has_u1) {
    const float* c10 = cell(u0 + 1, v0);
    for (int k = 0; k < Stride; ++k) out[k] += w10 * c10[k];
  }
  if (has_v1) {
    const float* c01 = cell(u0, v0 + 1);
    for (int k = 0; k < Stride; ++k) out[k] += w01 * c01[k];
  }
  if (has_u1 && has_v1) {
    const float* c11 = cell(u0 + 1, v0 + 1);
    for (int k = 0; k < Stride; ++k) out[k] += w11 * c11[k];
  }
}

void check_sample_bounds(const DenseFeatureLevel& level, double u, double v) {
  if (!level.in_bounds(u, v))
    throw std::out_of_range(
        "bilinear_sample out of range: (u=" + std::to_string(u) +
        ", v=" + std::to_string(v) + ") on " + std::to_string(level.width) +
        "x" + std::to_string(level.height) + " level");
}

}  // namespace

DescriptorD bilinear_sample_d(const DenseFeatureLevel& level, double u,
                              double v) {
  check_sample_bounds(level, u, v);
  DescriptorD out;
  bilinear_accumulate<kDescriptorDim>(level.descriptors.data(), level.width,
                                      level.height, u, v, out.data());
  return out;
}

Descriptor bilinear_sample(const DenseFeatureLevel& level, double u, double v) {
  return bilinear_sample_d(level, u, v).cast<float>();
}

double bilinear_sample_heat(const DenseFeatureLevel& level, double u, double v) {
  check_sample_bounds(level, u, v);
  double out;
  bilinear_accumulate<1>(level.heatmap.data(), level.width, level.height, u, v,
                         &out);
  return out;
}

void export_pyramid(const FeaturePyramid& pyramid,
                    const std::filesystem::path& path) {
  for (size_t li = 0; li < pyramid.levels.size(); ++li) {
    const auto& level = pyramid.levels[li];
    if (level.width <= 0 || level.height <= 0)
      throw FormatError("export_pyramid: level " + std::to_string(li) +
                        " is empty");
    if (level.descriptors.size() !=
            static_cast<size_t>(level.width) * level.height * kDescriptorDim ||
        level.heatmap.size() != static_cast<size_t>(level.width) * level.height)
      throw FormatError("export_pyramid: level " + std::to_string(li) +
                        " has inconsistent buffer sizes");
  }

  detail::BinaryWriter w(path);
  w.magic(kPyramidMagic);
  w.u16(kPyramidFormatVersion);
  w.u32(static_cast<std::uint32_t>(pyramid.image_width));
  w.u32(static_cast<std::uint32_t>(pyramid.image_height));
  for (const auto& level : pyramid.levels) {
    w.u8(static_cast<std::uint8_t>(level.scale));
    w.u32(static_cast<std::uint32_t>(level.width));
    w.u32(static_cast<std::uint32_t>(level.height));
    w.u8(static_cast<std::uint8_t>(kDescriptorDim));
    w.f32_array(level.descriptors.data(), level.descriptors.size());
    w.f32_array(level.heatmap.data(), level.heatmap.size());
  }
  w.commit();
}

FeaturePyramid import_pyramid(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic(kPyramidMagic);
  const auto version = r.u16("version");
  if (version != kPyramidFormatVersion)
    throw FormatError(path.string() + ": unsupported version " +
                      std::to_string(version));

  FeaturePyramid pyramid;
  pyramid.image_width = static_cast<int>(r.u32("image width"));
  pyramid.image_height = static_cast<int>(r.u32("image height"));
  if (pyramid.image_width <= 0 || pyramid.image_height <= 0)
    throw FormatError(path.string() + ": non-positive image dimensions");

  for (size_t li = 0; li < pyramid.levels.size(); ++li) {
    DenseFeatureLevel& level = pyramid.levels[li];
    const int expected_scale = kPyramidScales[li];
    level.scale = r.u8("level scale");
    if (level.scale != expected_scale)
      throw FormatError(path.string() + ": level " + std::to_string(li) +
                        " scale " + std::to_string(level.scale) +
                        ", expected " + std::to_string(expected_scale));
    level.width = static_cast<int>(r.u32("level width"));
    level.height = static_cast<int>(r.u32("level height"));
    if (level.width != pyramid.image_width / level.scale ||
        level.height != pyramid.image_height / level.scale)
      throw FormatError(path.string() + ": level " + std::to_string(li) +
                        " dimensions " + std::to_string(level.width) + "x" +
                        std::to_string(level.height) +
                        " inconsistent with image size and scale");
    const int dim = r.u8("descriptor dim");
    if (dim != kDescriptorDim)
      throw FormatError(path.string() + ": level " + std::to_string(li) +
                        " descriptor dim " + std::to_string(dim) +
                        ", expected " + std::to_string(kDescriptorDim));

    const size_t cells = static_cast<size_t>(level.width) * level.height;
    level.descriptors.resize(cells * kDescriptorDim);
    r.f32_array(level.descriptors.data(), level.descriptors.size(),
                "descriptors");
    level.heatmap.resize(cells);
    r.f32_array(level.heatmap.data(), level.heatmap.size(), "heatmap");

    for (int v = 0; v < level.height; ++v) {
      for (int u = 0; u < level.width; ++u) {
        const float* d = level.desc_at(u, v);
        for (int k = 0; k < kDescriptorDim; ++k)
          if (!std::isfinite(d[k]))
            throw FormatError(path.string() + ": " +
                              cell_name(static_cast<int>(li), level.scale, u, v) +
                              " descriptor component " + std::to_string(k) +
                              " not finite");
        float& hcell = level.heatmap[static_cast<size_t>(v) * level.width + u];
        if (!std::isfinite(hcell) || hcell < -1e-6f || hcell > 1.0f + 1e-6f)
          throw FormatError(path.string() + ": " +
                            cell_name(static_cast<int>(li), level.scale, u, v) +
                            " heatmap value " + std::to_string(hcell) +
                            " outside [0, 1]");
        hcell = std::clamp(hcell, 0.0f, 1.0f);
      }
    }
  }
  return pyramid;
}

}  // namespace vloc
