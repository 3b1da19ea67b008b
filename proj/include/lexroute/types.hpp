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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexroute {

/// One (key, weight) routing decision for a token.
struct Route {
  std::uint32_t key = 0;
  float weight = 0.0f;

  friend bool operator==(const Route&, const Route&) = default;
};

/// A contextualized token vector with the vocabulary id of its surface token.
struct TokenEmbedding {
  std::int32_t token_id = 0;
  std::uint32_t position = 0;
  std::vector<float> vector;
};

/// Token embedding plus its selected routes, sorted by descending weight
/// (ties by ascending key). An empty route list marks a deactivated token.
struct RoutedToken : TokenEmbedding {
  std::vector<Route> routes;
};

/// A query or a document: routed tokens plus an optional sequence-level
/// vector that interacts through the semantic key.
struct EncodedSequence {
  std::string id;
  std::vector<RoutedToken> tokens;
  std::optional<std::vector<float>> cls;
};

using EncodedQuery = EncodedSequence;
using EncodedDocument = EncodedSequence;

/// Routing scheme used to populate token routes.
enum class Scheme : std::uint8_t {
  kSingle = 0,    // no token routes, sequence vector only
  kAllToAll = 1,  // every token on one universal key
  kStatic = 2,    // key = surface token id
  kDynamic = 3,   // key = learned router prediction
};

std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view name);

}  // namespace lexroute
