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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vloc/errors.hpp"

namespace vloc::detail {

static_assert(std::endian::native == std::endian::little,
              "file IO assumes a little-endian host");

/// Little-endian binary writer with atomic replace-on-close semantics:
/// content goes to `<path>.tmp` and is renamed over the target by
/// commit().
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path)
      : path_(path), tmp_(path.string() + ".tmp") {
    stream_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw FormatError("cannot open for writing: " + tmp_.string());
  }
  ~BinaryWriter() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  void bytes(const void* data, size_t n) {
    stream_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u16(std::uint16_t v) { bytes(&v, 2); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f32(float v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  void f32_array(const float* data, size_t count) { bytes(data, count * 4); }
  void magic(const char tag[4]) { bytes(tag, 4); }

  void commit() {
    stream_.flush();
    if (!stream_) throw FormatError("write failed: " + tmp_.string());
    stream_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream stream_;
  bool committed_ = false;
};

/// Little-endian binary reader; every read throws FormatError on
/// truncation, naming the field being read.
class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path) : path_(path) {
    stream_.open(path, std::ios::binary);
    if (!stream_) throw FormatError("cannot open: " + path.string());
  }

  void bytes(void* out, size_t n, const char* field) {
    stream_.read(static_cast<char*>(out), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(stream_.gcount()) != n)
      throw FormatError(path_.string() + ": truncated while reading " + field);
  }
  std::uint8_t u8(const char* field) { std::uint8_t v; bytes(&v, 1, field); return v; }
  std::uint16_t u16(const char* field) { std::uint16_t v; bytes(&v, 2, field); return v; }
  std::uint32_t u32(const char* field) { std::uint32_t v; bytes(&v, 4, field); return v; }
  std::uint64_t u64(const char* field) { std::uint64_t v; bytes(&v, 8, field); return v; }
  float f32(const char* field) { float v; bytes(&v, 4, field); return v; }
  double f64(const char* field) { double v; bytes(&v, 8, field); return v; }
  void f32_array(float* out, size_t count, const char* field) {
    bytes(out, count * 4, field);
  }

  void expect_magic(const char tag[4]) {
    char got[4];
    bytes(got, 4, "magic");
    if (std::memcmp(got, tag, 4) != 0)
      throw FormatError(path_.string() + ": bad magic, expected \"" +
                        std::string(tag, 4) + "\"");
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream stream_;
};

}  // namespace vloc::detail
