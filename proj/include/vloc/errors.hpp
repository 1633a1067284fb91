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

#include <stdexcept>
#include <string>

namespace vloc {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent file content (magic, version, ranges,
/// truncation). The message names the offending record or field.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Input image too small for feature extraction.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Keypoint selection called with unusable inputs (e.g. empty candidates).
class SelectionError : public Error {
 public:
  using Error::Error;
};

/// Map construction failure (e.g. a level with no candidates).
class MapBuildError : public Error {
 public:
  using Error::Error;
};

/// Query against an empty or inconsistent map database.
class QueryError : public Error {
 public:
  using Error::Error;
};

/// Matching failure: no keypoints at a level, or every cost-volume node
/// unavailable for the frame.
class MatchingError : public Error {
 public:
  using Error::Error;
};

}  // namespace vloc
