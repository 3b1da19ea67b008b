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
#include <span>
#include <string>
#include <vector>

#include "lexroute/types.hpp"

namespace lexroute {

struct RankedDoc {
  std::string doc_id;
  float score = 0.0f;

  friend bool operator==(const RankedDoc&, const RankedDoc&) = default;
};

/// Descending score, ties by ascending doc id.
bool ranks_before(const RankedDoc& a, const RankedDoc& b);

float score_single_vector(std::span<const float> query_vector,
                          std::span<const float> doc_vector);

/// Sum over query tokens of the max dot product against all document tokens.
/// Routes are ignored. Throws on an empty document.
float score_all_to_all(const EncodedQuery& query, const EncodedDocument& doc);

/// MaxSim restricted to document tokens with the same token id. A query token
/// without a match contributes 0. With `with_cls`, the dot product of the
/// sequence vectors is added.
float score_static_lexical(const EncodedQuery& query,
                           const EncodedDocument& doc, bool with_cls);

/// Routed MaxSim: for every query route (key, w_q), the max over document
/// routes sharing that key of (w_q v_q)^T (w_d v_d); empty candidate sets
/// contribute 0. With `with_cls`, the sequence-vector dot product is added.
float score_dynamic(const EncodedQuery& query, const EncodedDocument& doc,
                    bool with_cls);

/// Dispatches on scheme. kSingle always uses the sequence vectors.
float score(Scheme scheme, const EncodedQuery& query,
            const EncodedDocument& doc, bool with_cls);

/// True when some query route key also appears among the document routes.
bool shares_routed_key(const EncodedQuery& query, const EncodedDocument& doc);

struct RankOptions {
  /// Only rank documents sharing at least one routed key with the query.
  /// This mirrors the candidate set of inverted-index search without the
  /// semantic store.
  bool reachable_only = false;
};

/// Scores every document, sorts by `ranks_before` and keeps `top_k`.
std::vector<RankedDoc> brute_force_rank(const EncodedQuery& query,
                                        std::span<const EncodedDocument> corpus,
                                        std::size_t top_k, Scheme scheme,
                                        bool with_cls, RankOptions options = {});

}  // namespace lexroute
