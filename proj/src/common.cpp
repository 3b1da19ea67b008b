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

#include "lexroute/common.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>
#include <thread>

#include "binary_io.hpp"
#include "lexroute/types.hpp"

namespace lexroute {

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LEXROUTE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<std::size_t>(n, cap);
  }
  return n;
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kSingle: return "single";
    case Scheme::kAllToAll: return "all_to_all";
    case Scheme::kStatic: return "static";
    case Scheme::kDynamic: return "dynamic";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "single") return Scheme::kSingle;
  if (name == "all_to_all" || name == "all-to-all") return Scheme::kAllToAll;
  if (name == "static") return Scheme::kStatic;
  if (name == "dynamic") return Scheme::kDynamic;
  fail(ErrorCode::kInvalidArgument, "unknown scheme '" + std::string(name) + "'");
}

namespace detail {

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIo, "read failed: " + path.string());
  return bytes;
}

void atomic_write(const std::filesystem::path& path,
                  std::span<const char> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

}  // namespace detail
}  // namespace lexroute
