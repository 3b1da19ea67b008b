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

#include "lexroute/embedding_io.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "binary_io.hpp"
#include "lexroute/common.hpp"

// Binary layout (little-endian):
//
//   "CTEM" | version u32 | record_count u32 | dim u32 | cls_dim u32
//   record_count x:
//     id (length u32 | bytes) | has_cls u8 | [cls_dim f32]
//     token_count u32 | token_count x:
//       token_id i32 | position u32 | dim f32 | route_count u32 |
//       route_count x (key u32 | weight f32)

namespace lexroute {
namespace {

using nlohmann::json;

constexpr char kEmbeddingMagic[] = "CTEM";
constexpr std::uint32_t kEmbeddingVersion = 1;

std::vector<float> float_array(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorCode::kFormat, std::string("embedding record: '") + what + "' must be an array");
  std::vector<float> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) fail(ErrorCode::kFormat, std::string("embedding record: non-numeric '") + what + "'");
    out.push_back(x.get<float>());
  }
  return out;
}

std::uint32_t first_token_dim(std::span<const EncodedSequence> sequences) {
  for (const auto& s : sequences)
    if (!s.tokens.empty()) return static_cast<std::uint32_t>(s.tokens.front().vector.size());
  return 0;
}

std::uint32_t first_cls_dim(std::span<const EncodedSequence> sequences) {
  for (const auto& s : sequences)
    if (s.cls) return static_cast<std::uint32_t>(s.cls->size());
  return 0;
}

EncodedSequence parse_record(const json& j) {
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
    fail(ErrorCode::kFormat, "embedding record: missing string 'id'");
  EncodedSequence seq;
  seq.id = j["id"].get<std::string>();
  if (j.contains("cls") && !j["cls"].is_null()) seq.cls = float_array(j["cls"], "cls");
  if (j.contains("tokens")) {
    const auto& tokens = j["tokens"];
    if (!tokens.is_array()) fail(ErrorCode::kFormat, "embedding record: 'tokens' must be an array");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto& t = tokens[i];
      if (!t.is_object() || !t.contains("tid") || !t["tid"].is_number_integer() || !t.contains("vec"))
        fail(ErrorCode::kFormat, "embedding record: token needs integer 'tid' and 'vec'");
      RoutedToken tok;
      tok.token_id = t["tid"].get<std::int32_t>();
      tok.position = t.contains("pos") ? t["pos"].get<std::uint32_t>() : static_cast<std::uint32_t>(i);
      tok.vector = float_array(t["vec"], "vec");
      if (t.contains("routes")) {
        for (const auto& r : t["routes"]) {
          if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number())
            fail(ErrorCode::kFormat, "embedding record: route must be [key, weight]");
          const auto key = r[0].get<std::int64_t>();
          if (key < 0) fail(ErrorCode::kFormat, "embedding record: negative route key");
          tok.routes.push_back({static_cast<std::uint32_t>(key), r[1].get<float>()});
        }
      }
      seq.tokens.push_back(std::move(tok));
    }
  }
  return seq;
}

}  // namespace

EncodedSequence parse_embedding_record(std::string_view json_line) {
  try {
    return parse_record(json::parse(json_line));
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("embedding record: ") + e.what());
  }
}

std::string format_embedding_record(const EncodedSequence& sequence) {
  json j;
  j["id"] = sequence.id;
  if (sequence.cls) j["cls"] = *sequence.cls;
  json tokens = json::array();
  for (const auto& t : sequence.tokens) {
    json tok{{"tid", t.token_id}, {"pos", t.position}, {"vec", t.vector}};
    if (!t.routes.empty()) {
      json routes = json::array();
      for (const auto& r : t.routes) routes.push_back(json::array({r.key, r.weight}));
      tok["routes"] = std::move(routes);
    }
    tokens.push_back(std::move(tok));
  }
  j["tokens"] = std::move(tokens);
  return j.dump();
}

std::vector<char> serialize_embeddings(std::span<const EncodedSequence> sequences) {
  validate_embeddings(sequences);
  const std::uint32_t dim = first_token_dim(sequences);
  const std::uint32_t cls_dim = first_cls_dim(sequences);
  detail::ByteWriter w;
  w.put_magic({kEmbeddingMagic, 4});
  w.put(kEmbeddingVersion);
  w.put(static_cast<std::uint32_t>(sequences.size()));
  w.put(dim);
  w.put(cls_dim);
  for (const auto& s : sequences) {
    w.put_string(s.id);
    w.put(static_cast<std::uint8_t>(s.cls ? 1 : 0));
    if (s.cls) w.put_span(std::span<const float>(*s.cls));
    w.put(static_cast<std::uint32_t>(s.tokens.size()));
    for (const auto& t : s.tokens) {
      w.put(t.token_id);
      w.put(t.position);
      w.put_span(std::span<const float>(t.vector));
      w.put(static_cast<std::uint32_t>(t.routes.size()));
      for (const auto& r : t.routes) {
        w.put(r.key);
        w.put(r.weight);
      }
    }
  }
  return std::move(w.bytes());
}

std::vector<EncodedSequence> deserialize_embeddings(std::span<const char> bytes) {
  detail::ByteReader r(bytes, "embedding file");
  r.expect_magic({kEmbeddingMagic, 4});
  if (r.get<std::uint32_t>() != kEmbeddingVersion) fail(ErrorCode::kFormat, "embedding file: unsupported version");
  const auto count = r.get<std::uint32_t>();
  const auto dim = r.get<std::uint32_t>();
  const auto cls_dim = r.get<std::uint32_t>();
  r.need_elements(count, 9);  // id length, has_cls, token count
  std::vector<EncodedSequence> out(count);
  for (auto& s : out) {
    s.id = r.get_string();
    const auto has_cls = r.get<std::uint8_t>();
    if (has_cls > 1) fail(ErrorCode::kFormat, "embedding file: bad cls flag");
    if (has_cls) {
      r.need_elements(cls_dim, sizeof(float));
      s.cls.emplace(cls_dim);
      r.get_into(std::span<float>(*s.cls));
    }
    const auto tokens = r.get<std::uint32_t>();
    r.need_elements(tokens, 12 + std::uint64_t{dim} * sizeof(float));
    s.tokens.resize(tokens);
    for (auto& t : s.tokens) {
      t.token_id = r.get<std::int32_t>();
      t.position = r.get<std::uint32_t>();
      t.vector.resize(dim);
      r.get_into(std::span<float>(t.vector));
      const auto routes = r.get<std::uint32_t>();
      r.need_elements(routes, 8);
      t.routes.resize(routes);
      for (auto& route : t.routes) {
        route.key = r.get<std::uint32_t>();
        route.weight = r.get<float>();
      }
    }
  }
  if (!r.at_end()) fail(ErrorCode::kFormat, "embedding file: trailing bytes");
  validate_embeddings(out);
  return out;
}

void validate_embeddings(std::span<const EncodedSequence> sequences) {
  const std::size_t dim = first_token_dim(sequences);
  const std::size_t cls_dim = first_cls_dim(sequences);
  const auto finite = [](const std::vector<float>& v) {
    return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
  };
  for (const auto& s : sequences) {
    if (s.cls) {
      require(s.cls->size() == cls_dim, ErrorCode::kDimensionMismatch,
              "embeddings: sequence vector dimensions differ");
      require(finite(*s.cls), ErrorCode::kNumeric, "embeddings: non-finite sequence vector");
    }
    for (const auto& t : s.tokens) {
      require(t.vector.size() == dim, ErrorCode::kDimensionMismatch,
              "embeddings: token vector dimensions differ");
      require(finite(t.vector), ErrorCode::kNumeric, "embeddings: non-finite token vector");
      require(t.token_id >= 0, ErrorCode::kInvalidArgument, "embeddings: negative token id");
      for (const auto& r : t.routes)
        require(std::isfinite(r.weight) && r.weight > 0.0f, ErrorCode::kNumeric,
                "embeddings: route weights must be positive and finite");
    }
  }
}

std::vector<EncodedSequence> read_embeddings(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() >= 4 && std::string_view(bytes.data(), 4) == std::string_view(kEmbeddingMagic, 4))
    return deserialize_embeddings(bytes);
  std::vector<EncodedSequence> out;
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_embedding_record(line));
    } catch (const Error& e) {
      fail(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  validate_embeddings(out);
  return out;
}

void write_embeddings_jsonl(std::span<const EncodedSequence> sequences,
                            const std::filesystem::path& path) {
  validate_embeddings(sequences);
  std::string text;
  for (const auto& s : sequences) {
    text += format_embedding_record(s);
    text += '\n';
  }
  detail::atomic_write(path, {text.data(), text.size()});
}

void write_embeddings_binary(std::span<const EncodedSequence> sequences,
                             const std::filesystem::path& path) {
  detail::atomic_write(path, serialize_embeddings(sequences));
}

}  // namespace lexroute
