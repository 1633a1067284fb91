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

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "vloc/errors.hpp"
#include "vloc/feature_embedding.hpp"
#include "vloc/rng.hpp"

using namespace vloc;
namespace fs = std::filesystem;

namespace {

Image constant_image(int w, int h, float value) {
  Image img;
  img.width = w;
  img.height = h;
  img.channels = 1;
  img.pixels.assign(static_cast<size_t>(w) * h, value);
  return img;
}

Image random_image(int w, int h, std::uint64_t seed) {
  Image img = constant_image(w, h, 0.0f);
  std::mt19937_64 rng(seed);
  for (float& p : img.pixels) p = static_cast<float>(uniform_unit(rng));
  return img;
}

// Brute-force per-cell gradient energy: clamped central differences,
// averaged over the cell's pixel block. Mirrors the extractor contract
// without sharing its code path.
double oracle_cell_energy(const Image& img, int scale, int cu, int cv) {
  auto at = [&](int u, int v) {
    u = std::clamp(u, 0, img.width - 1);
    v = std::clamp(v, 0, img.height - 1);
    return static_cast<double>(img.pixels[static_cast<size_t>(v) * img.width + u]);
  };
  double sum = 0.0;
  for (int v = cv * scale; v < (cv + 1) * scale; ++v)
    for (int u = cu * scale; u < (cu + 1) * scale; ++u) {
      const double gx = 0.5 * (at(u + 1, v) - at(u - 1, v));
      const double gy = 0.5 * (at(u, v + 1) - at(u, v - 1));
      sum += gx * gx + gy * gy;
    }
  return sum / (scale * scale);
}

fs::path temp_file(const char* stem) {
  return fs::temp_directory_path() / (std::string(stem) + "_" +
                                      std::to_string(::getpid()) + ".alfp");
}

std::vector<char> read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void write_all(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("extract_pyramid rejects tiny images") {
  CHECK_THROWS_AS((void)extract_pyramid(constant_image(15, 32, 0.5f)), SizeError);
  CHECK_THROWS_AS((void)extract_pyramid(constant_image(32, 8, 0.5f)), SizeError);
}

TEST_CASE("constant image: heatmap identically zero, descriptors unit or zero") {
  const FeaturePyramid pyr = extract_pyramid(constant_image(64, 48, 0.37f));
  for (const auto& level : pyr.levels) {
    for (float h : level.heatmap) CHECK(h == 0.0f);
    for (int v = 0; v < level.height; ++v)
      for (int u = 0; u < level.width; ++u) {
        Eigen::Map<const Descriptor> d(level.desc_at(u, v));
        CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-6));
      }
  }
  // All-black image: flat zero patches map to the zero descriptor.
  const FeaturePyramid black = extract_pyramid(constant_image(64, 48, 0.0f));
  for (const auto& level : black.levels)
    for (int v = 0; v < level.height; ++v)
      for (int u = 0; u < level.width; ++u) {
        Eigen::Map<const Descriptor> d(level.desc_at(u, v));
        CHECK(d.norm() == 0.0f);
      }
}

TEST_CASE("single bright dot: heatmap max at the dot's cell on every level") {
  Image img = constant_image(64, 64, 0.0f);
  const int dot_u = 33, dot_v = 29;  // interior of its block at all scales
  img.pixels[static_cast<size_t>(dot_v) * img.width + dot_u] = 1.0f;
  const FeaturePyramid pyr = extract_pyramid(img);

  for (const auto& level : pyr.levels) {
    // Oracle argmax by brute-force gradient energy.
    int best_u = -1, best_v = -1;
    double best = -1.0;
    for (int cv = 0; cv < level.height; ++cv)
      for (int cu = 0; cu < level.width; ++cu) {
        const double e = oracle_cell_energy(img, level.scale, cu, cv);
        if (e > best) {
          best = e;
          best_u = cu;
          best_v = cv;
        }
      }
    CHECK(best_u == dot_u / level.scale);
    CHECK(best_v == dot_v / level.scale);

    int got_u = -1, got_v = -1;
    float got = -1.0f;
    for (int cv = 0; cv < level.height; ++cv)
      for (int cu = 0; cu < level.width; ++cu)
        if (level.heat_at(cu, cv) > got) {
          got = level.heat_at(cu, cv);
          got_u = cu;
          got_v = cv;
        }
    CHECK(got_u == best_u);
    CHECK(got_v == best_v);
    CHECK(got == 1.0f);  // normalized to the per-level max
  }
}

TEST_CASE("heatmap normalized to [0,1]; same image gives identical pyramids") {
  const Image img = random_image(80, 64, 99);
  const FeaturePyramid a = extract_pyramid(img);
  const FeaturePyramid b = extract_pyramid(img);
  for (size_t li = 0; li < a.levels.size(); ++li) {
    CHECK(a.levels[li].descriptors == b.levels[li].descriptors);
    CHECK(a.levels[li].heatmap == b.levels[li].heatmap);
    for (float h : a.levels[li].heatmap) {
      CHECK(h >= 0.0f);
      CHECK(h <= 1.0f);
    }
  }
}

TEST_CASE("shifting the image by one block shifts level cells by one") {
  const int shift_blocks = 1;
  const Image img = random_image(96, 80, 123);
  const FeaturePyramid base = extract_pyramid(img);

  for (size_t li = 0; li < kPyramidScales.size(); ++li) {
    const int s = kPyramidScales[li];
    Image shifted = img;
    for (int v = 0; v < img.height; ++v)
      for (int u = 0; u < img.width; ++u) {
        const int src_u = u - shift_blocks * s;
        shifted.pixels[static_cast<size_t>(v) * img.width + u] =
            src_u >= 0 ? img.pixels[static_cast<size_t>(v) * img.width + src_u]
                       : 0.0f;
      }
    const FeaturePyramid moved = extract_pyramid(shifted);
    const DenseFeatureLevel& a = base.levels[li];
    const DenseFeatureLevel& b = moved.levels[li];
    // Interior cells only; image borders see clamped gradients and the
    // fill value.
    for (int cv = 1; cv + 1 < a.height; ++cv)
      for (int cu = 1; cu + 1 < a.width - shift_blocks; ++cu) {
        Eigen::Map<const Descriptor> da(a.desc_at(cu, cv));
        Eigen::Map<const Descriptor> db(b.desc_at(cu + shift_blocks, cv));
        CHECK((da - db).cwiseAbs().maxCoeff() < 1e-6f);
      }
  }
}

TEST_CASE("pyramid export/import round-trips bit-exactly") {
  const fs::path path = temp_file("roundtrip");
  const FeaturePyramid pyr = extract_pyramid(random_image(64, 48, 7));
  export_pyramid(pyr, path);
  const FeaturePyramid back = import_pyramid(path);
  CHECK(back.image_width == pyr.image_width);
  CHECK(back.image_height == pyr.image_height);
  for (size_t li = 0; li < pyr.levels.size(); ++li) {
    CHECK(back.levels[li].scale == pyr.levels[li].scale);
    CHECK(back.levels[li].descriptors == pyr.levels[li].descriptors);
    CHECK(back.levels[li].heatmap == pyr.levels[li].heatmap);
  }
  // Overwrite replaces content.
  export_pyramid(back, path);
  CHECK(import_pyramid(path).levels[0].descriptors ==
        pyr.levels[0].descriptors);
  fs::remove(path);
}

TEST_CASE("import rejects bad magic, out-of-range heatmap, truncation") {
  const fs::path path = temp_file("corrupt");
  FeaturePyramid pyr = extract_pyramid(random_image(32, 32, 3));

  SUBCASE("bad magic") {
    export_pyramid(pyr, path);
    auto bytes = read_all(path);
    bytes[0] = 'X';
    write_all(path, bytes);
    CHECK_THROWS_WITH_AS((void)import_pyramid(path),
                         doctest::Contains("bad magic"), FormatError);
  }

  SUBCASE("heatmap value above one names the cell") {
    pyr.levels[1].heatmap[3 * pyr.levels[1].width + 4] = 1.5f;
    export_pyramid(pyr, path);
    try {
      (void)import_pyramid(path);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("u=4") != std::string::npos);
      CHECK(msg.find("v=3") != std::string::npos);
      CHECK(msg.find("1.5") != std::string::npos);
    }
  }

  SUBCASE("slightly out-of-range heatmap within slack is clamped") {
    pyr.levels[0].heatmap[0] = 1.0f + 5e-7f;
    export_pyramid(pyr, path);
    const FeaturePyramid back = import_pyramid(path);
    CHECK(back.levels[0].heatmap[0] == 1.0f);
  }

  SUBCASE("non-finite descriptor rejected") {
    pyr.levels[2].desc_at(1, 1)[5] = std::numeric_limits<float>::quiet_NaN();
    export_pyramid(pyr, path);
    CHECK_THROWS_WITH_AS((void)import_pyramid(path),
                         doctest::Contains("not finite"), FormatError);
  }

  SUBCASE("truncated file") {
    export_pyramid(pyr, path);
    auto bytes = read_all(path);
    bytes.resize(bytes.size() / 2);
    write_all(path, bytes);
    CHECK_THROWS_WITH_AS((void)import_pyramid(path),
                         doctest::Contains("truncated"), FormatError);
  }

  fs::remove(path);
}
