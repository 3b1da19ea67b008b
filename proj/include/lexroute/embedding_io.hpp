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

// Token-embedding files.
//
// JSON Lines, one record per query or document:
//
//   {"id": "d1", "cls": [..], "tokens": [{"tid": 7, "vec": [..],
//                                         "routes": [[key, weight], ..]}]}
//
// "cls" and "routes" are optional. The binary twin starts with the magic
// "CTEM" and carries the same fields; see embedding_io.cpp for the layout.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexroute/types.hpp"

namespace lexroute {

EncodedSequence parse_embedding_record(std::string_view json_line);
std::string format_embedding_record(const EncodedSequence& sequence);

/// Detects the format from the first bytes of the file.
std::vector<EncodedSequence> read_embeddings(const std::filesystem::path& path);

void write_embeddings_jsonl(std::span<const EncodedSequence> sequences,
                            const std::filesystem::path& path);
void write_embeddings_binary(std::span<const EncodedSequence> sequences,
                             const std::filesystem::path& path);

std::vector<char> serialize_embeddings(
    std::span<const EncodedSequence> sequences);
std::vector<EncodedSequence> deserialize_embeddings(std::span<const char> bytes);

/// Throws unless every token vector has the same dimension, every sequence
/// vector has the same dimension, and all values are finite.
void validate_embeddings(std::span<const EncodedSequence> sequences);

}  // namespace lexroute
