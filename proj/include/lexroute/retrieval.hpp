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
#include <vector>

#include "lexroute/index.hpp"
#include "lexroute/router.hpp"
#include "lexroute/scoring.hpp"

namespace lexroute {

/// Wall time of the four pipeline stages, in nanoseconds.
struct LatencyBreakdown {
  std::int64_t routing_ns = 0;
  std::int64_t token_retrieval_ns = 0;
  std::int64_t scatter_ns = 0;
  std::int64_t sort_ns = 0;
  std::int64_t total_ns = 0;

  std::int64_t stage_sum() const {
    return routing_ns + token_retrieval_ns + scatter_ns + sort_ns;
  }
};

struct SearchResult {
  std::vector<RankedDoc> ranked;
  std::uint64_t dot_products_used = 0;
  LatencyBreakdown latency;
};

struct SearchOptions {
  std::size_t top_k = 10;
  bool with_cls = false;
  /// When set, query tokens are re-routed with this router during the
  /// routing stage (top `query_keys` keys). Otherwise the query's own routes
  /// are used.
  const RouterParams* router = nullptr;
  std::size_t query_keys = 1;
};

/// Token retrieval over the posting lists of the query's keys, scatter-max per
/// (query route, document), scatter-add per document, then top-k sort.
/// Without `with_cls` only documents reached through a shared key are
/// candidates; with it every document receives its sequence-vector term.
SearchResult search(const EncodedQuery& query, const InvertedIndex& index,
                    const SearchOptions& options);

/// Upper bound on dot products `search` performs: the summed posting length
/// over the query's routes plus doc_count when with_cls. Exact for search.
std::uint64_t count_dot_products(const EncodedQuery& query,
                                 const InvertedIndex& index, bool with_cls);

struct LatencyReport {
  /// Per-query stage averages of the trial with the lowest total average.
  LatencyBreakdown best_average;
  /// Total per-query average of each trial, in trial order.
  std::vector<double> trial_average_total_ns;
  double mean_over_trials_ns = 0.0;
  std::size_t queries = 0;
  std::size_t trials = 0;
};

/// Runs every query one at a time for `trials` rounds and reports the minimum
/// per-query average across trials. Index loading is not timed.
LatencyReport measure_latency(std::span<const EncodedQuery> queries,
                              const InvertedIndex& index,
                              const SearchOptions& options, std::size_t trials);

}  // namespace lexroute
