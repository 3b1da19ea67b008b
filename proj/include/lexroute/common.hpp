// Copyright 2026 The lexroute Authors
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

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace lexroute {

/// Error categories. The numeric values are mirrored by the C API status codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kIo = 3,
  kFormat = 4,
  kNumeric = 5,
  kState = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) fail(code, message);
}

/// Sequential fp32 dot product. Every scoring path goes through this function
/// so that index search and brute-force scoring agree bit for bit.
inline float dot(std::span<const float> a, std::span<const float> b) {
  require(a.size() == b.size(), ErrorCode::kDimensionMismatch,
          "dot: vector dimensions differ");
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

/// Worker count for parallel sections: hardware concurrency, capped by the
/// LEXROUTE_THREADS environment variable when set to a positive integer.
std::size_t worker_count();

}  // namespace lexroute
