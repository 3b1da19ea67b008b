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

#include "lexroute/scoring.hpp"

#include <algorithm>
#include <limits>

#include "lexroute/common.hpp"

namespace lexroute {
namespace {

float cls_term(const EncodedQuery& query, const EncodedDocument& doc) {
  require(query.cls.has_value() && doc.cls.has_value(),
          ErrorCode::kInvalidArgument,
          "sequence-vector term requested but a sequence vector is missing");
  return dot(*query.cls, *doc.cls);
}

std::vector<float> scaled(const std::vector<float>& v, float w) {
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = w * v[i];
  return out;
}

}  // namespace

bool ranks_before(const RankedDoc& a, const RankedDoc& b) {
  return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
}

float score_single_vector(std::span<const float> query_vector,
                          std::span<const float> doc_vector) {
  return dot(query_vector, doc_vector);
}

float score_all_to_all(const EncodedQuery& query, const EncodedDocument& doc) {
  require(!doc.tokens.empty(), ErrorCode::kInvalidArgument,
          "score_all_to_all: empty document");
  float total = 0.0f;
  for (const auto& q : query.tokens) {
    float best = -std::numeric_limits<float>::infinity();
    for (const auto& d : doc.tokens) best = std::max(best, dot(q.vector, d.vector));
    total += best;
  }
  return total;
}

float score_static_lexical(const EncodedQuery& query,
                           const EncodedDocument& doc, bool with_cls) {
  float total = 0.0f;
  for (const auto& q : query.tokens) {
    bool matched = false;
    float best = -std::numeric_limits<float>::infinity();
    for (const auto& d : doc.tokens) {
      if (d.token_id != q.token_id) continue;
      matched = true;
      best = std::max(best, dot(q.vector, d.vector));
    }
    if (matched) total += best;
  }
  if (with_cls) total += cls_term(query, doc);
  return total;
}

float score_dynamic(const EncodedQuery& query, const EncodedDocument& doc,
                    bool with_cls) {
  // Pre-scale document routes once: (key, w * v).
  struct Scaled {
    std::uint32_t key;
    std::vector<float> vector;
  };
  std::vector<Scaled> doc_routes;
  for (const auto& d : doc.tokens)
    for (const auto& r : d.routes) doc_routes.push_back({r.key, scaled(d.vector, r.weight)});

  float total = 0.0f;
  for (const auto& q : query.tokens) {
    for (const auto& qr : q.routes) {
      const auto u = scaled(q.vector, qr.weight);
      bool matched = false;
      float best = -std::numeric_limits<float>::infinity();
      for (const auto& dr : doc_routes) {
        if (dr.key != qr.key) continue;
        matched = true;
        best = std::max(best, dot(u, dr.vector));
      }
      if (matched) total += best;
    }
  }
  if (with_cls) total += cls_term(query, doc);
  return total;
}

float score(Scheme scheme, const EncodedQuery& query,
            const EncodedDocument& doc, bool with_cls) {
  switch (scheme) {
    case Scheme::kSingle:
      return cls_term(query, doc);
    case Scheme::kAllToAll: {
      const float s = score_all_to_all(query, doc);
      return with_cls ? s + cls_term(query, doc) : s;
    }
    case Scheme::kStatic:
      return score_static_lexical(query, doc, with_cls);
    case Scheme::kDynamic:
      return score_dynamic(query, doc, with_cls);
  }
  fail(ErrorCode::kInvalidArgument, "score: unknown scheme");
}

bool shares_routed_key(const EncodedQuery& query, const EncodedDocument& doc) {
  std::vector<std::uint32_t> keys;
  for (const auto& q : query.tokens)
    for (const auto& r : q.routes) keys.push_back(r.key);
  std::sort(keys.begin(), keys.end());
  for (const auto& d : doc.tokens)
    for (const auto& r : d.routes)
      if (std::binary_search(keys.begin(), keys.end(), r.key)) return true;
  return false;
}

std::vector<RankedDoc> brute_force_rank(const EncodedQuery& query,
                                        std::span<const EncodedDocument> corpus,
                                        std::size_t top_k, Scheme scheme,
                                        bool with_cls, RankOptions options) {
  require(top_k >= 1, ErrorCode::kInvalidArgument,
          "brute_force_rank: top_k must be >= 1");
  std::vector<RankedDoc> ranked;
  ranked.reserve(corpus.size());
  for (const auto& doc : corpus) {
    if (options.reachable_only && !with_cls && !shares_routed_key(query, doc))
      continue;
    ranked.push_back({doc.id, score(scheme, query, doc, with_cls)});
  }
  const std::size_t keep = std::min(top_k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end(),
                    ranks_before);
  ranked.resize(keep);
  return ranked;
}

}  // namespace lexroute
