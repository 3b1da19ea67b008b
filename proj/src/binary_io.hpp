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

// Little-endian byte buffers and atomic file output shared by the on-disk
// formats.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "lexroute/common.hpp"

namespace lexroute::detail {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

class ByteWriter {
 public:
  template <typename T>
    requires std::is_trivially_copyable_v<T>
  void put(T value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  void put_span(std::span<const T> values) {
    const auto* p = reinterpret_cast<const char*>(values.data());
    bytes_.insert(bytes_.end(), p, p + values.size_bytes());
  }

  void put_magic(std::string_view magic) {
    bytes_.insert(bytes_.end(), magic.begin(), magic.end());
  }

  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }

  std::vector<char>& bytes() { return bytes_; }

 private:
  std::vector<char> bytes_;
};

/// Bounds-checked reader; running past the end raises a kFormat error.
class ByteReader {
 public:
  ByteReader(std::span<const char> bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  void get_into(std::span<T> out) {
    need(out.size_bytes());
    std::memcpy(out.data(), bytes_.data() + pos_, out.size_bytes());
    pos_ += out.size_bytes();
  }

  void expect_magic(std::string_view magic) {
    need(magic.size());
    if (std::string_view(bytes_.data() + pos_, magic.size()) != magic)
      fail(ErrorCode::kFormat, what_ + ": bad magic bytes");
    pos_ += magic.size();
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  /// Throws unless `count` elements of `elem_size` bytes fit in the rest.
  void need_elements(std::uint64_t count, std::uint64_t elem_size) const {
    if (elem_size != 0 && count > remaining() / elem_size)
      fail(ErrorCode::kFormat, what_ + ": truncated file");
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }
  const std::string& what() const { return what_; }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) fail(ErrorCode::kFormat, what_ + ": truncated file");
  }

  std::span<const char> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<char> read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`.
void atomic_write(const std::filesystem::path& path,
                  std::span<const char> bytes);

}  // namespace lexroute::detail
