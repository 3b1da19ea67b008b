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

#include "lexroute/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>

#include "lexroute/common.hpp"

namespace lexroute {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count();
}

struct QueryRoute {
  std::uint32_t key;
  std::vector<float> vector;  // w * v
};

std::vector<QueryRoute> prepare_routes(const EncodedQuery& query,
                                       const InvertedIndex& index,
                                       const SearchOptions& options) {
  std::vector<QueryRoute> routes;
  for (const auto& token : query.tokens) {
    require(token.vector.size() == index.meta.dim || index.total_entries() == 0,
            ErrorCode::kDimensionMismatch,
            "search: query token dimension does not match the index");
    auto add = [&](const Route& r) {
      if (r.key >= index.meta.key_count) return;  // no posting list, nothing to scan
      std::vector<float> u(token.vector.size());
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = r.weight * token.vector[i];
      routes.push_back({r.key, std::move(u)});
    };
    if (options.router != nullptr) {
      for (const auto& r : select_top_keys(router_representation(token.vector, *options.router),
                                           options.query_keys))
        add(r);
    } else {
      for (const auto& r : token.routes) add(r);
    }
  }
  return routes;
}

}  // namespace

SearchResult search(const EncodedQuery& query, const InvertedIndex& index,
                    const SearchOptions& options) {
  require(options.top_k >= 1, ErrorCode::kInvalidArgument, "search: top_k must be >= 1");
  const auto& meta = index.meta;
  SearchResult result;
  const auto t0 = Clock::now();

  // Stage 1: routing.
  if (options.with_cls) {
    require(meta.has_cls, ErrorCode::kInvalidArgument,
            "search: sequence-vector scoring requested but the index has no cls store");
    require(query.cls.has_value() && query.cls->size() == meta.cls_dim,
            ErrorCode::kDimensionMismatch, "search: query sequence vector missing or mis-sized");
  }
  const auto routes = prepare_routes(query, index, options);
  const auto t1 = Clock::now();

  // Stage 2: token-level retrieval. One score per posting entry per route.
  std::vector<std::vector<float>> hits(routes.size());
  std::vector<float> decoded(meta.dim);
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const auto& list = index.postings[routes[r].key];
    auto& out = hits[r];
    out.resize(list.size());
    if (meta.quantized) {
      const std::size_t stride = index.codebook->num_subspaces;
      for (std::size_t e = 0; e < list.size(); ++e) {
        pq_decode_into({list.codes.data() + e * stride, stride}, *index.codebook, decoded);
        out[e] = dot(routes[r].vector, decoded);
      }
    } else {
      for (std::size_t e = 0; e < list.size(); ++e)
        out[e] = dot(routes[r].vector, {list.vectors.data() + e * meta.dim, meta.dim});
    }
    result.dot_products_used += list.size();
  }
  std::vector<float> cls_scores;
  if (options.with_cls) {
    cls_scores.resize(meta.doc_count);
    for (std::uint32_t d = 0; d < meta.doc_count; ++d) cls_scores[d] = dot(*query.cls, index.cls_vector(d));
    result.dot_products_used += meta.doc_count;
  }
  const auto t2 = Clock::now();

  // Stage 3: scatter. Postings are sorted by doc id, so the max per
  // (route, doc) is a reduction over runs of equal ids; runs are then added
  // into the per-document accumulator in route order.
  std::vector<float> acc(meta.doc_count, 0.0f);
  std::vector<std::uint8_t> touched(meta.doc_count, 0);
  std::vector<std::uint32_t> candidates;
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const auto& ids = index.postings[routes[r].key].doc_ids;
    const auto& scores = hits[r];
    for (std::size_t e = 0; e < ids.size();) {
      const std::uint32_t doc = ids[e];
      float best = scores[e];
      for (++e; e < ids.size() && ids[e] == doc; ++e) best = std::max(best, scores[e]);
      acc[doc] += best;
      if (!touched[doc]) {
        touched[doc] = 1;
        candidates.push_back(doc);
      }
    }
  }
  if (options.with_cls) {
    candidates.resize(meta.doc_count);
    std::iota(candidates.begin(), candidates.end(), 0u);
    for (std::uint32_t d = 0; d < meta.doc_count; ++d) acc[d] += cls_scores[d];
  }
  const auto t3 = Clock::now();

  // Stage 4: sort.
  result.ranked.reserve(candidates.size());
  for (auto d : candidates) result.ranked.push_back({index.doc_names[d], acc[d]});
  const std::size_t keep = std::min(options.top_k, result.ranked.size());
  std::partial_sort(result.ranked.begin(), result.ranked.begin() + keep, result.ranked.end(),
                    ranks_before);
  result.ranked.resize(keep);
  const auto t4 = Clock::now();

  result.latency.routing_ns = elapsed_ns(t0, t1);
  result.latency.token_retrieval_ns = elapsed_ns(t1, t2);
  result.latency.scatter_ns = elapsed_ns(t2, t3);
  result.latency.sort_ns = elapsed_ns(t3, t4);
  result.latency.total_ns = elapsed_ns(t0, Clock::now());
  return result;
}

std::uint64_t count_dot_products(const EncodedQuery& query,
                                 const InvertedIndex& index, bool with_cls) {
  std::uint64_t n = 0;
  for (const auto& token : query.tokens)
    for (const auto& r : token.routes)
      if (r.key < index.meta.key_count) n += index.postings[r.key].size();
  if (with_cls) n += index.meta.doc_count;
  return n;
}

LatencyReport measure_latency(std::span<const EncodedQuery> queries,
                              const InvertedIndex& index,
                              const SearchOptions& options, std::size_t trials) {
  require(trials >= 1, ErrorCode::kInvalidArgument, "measure_latency: trials must be >= 1");
  require(!queries.empty(), ErrorCode::kInvalidArgument, "measure_latency: empty query set");
  LatencyReport report;
  report.queries = queries.size();
  report.trials = trials;
  const double nq = static_cast<double>(queries.size());
  double best_total = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    LatencyBreakdown sum;
    for (const auto& q : queries) {
      const auto lat = search(q, index, options).latency;
      sum.routing_ns += lat.routing_ns;
      sum.token_retrieval_ns += lat.token_retrieval_ns;
      sum.scatter_ns += lat.scatter_ns;
      sum.sort_ns += lat.sort_ns;
      sum.total_ns += lat.total_ns;
    }
    const double avg_total = static_cast<double>(sum.total_ns) / nq;
    report.trial_average_total_ns.push_back(avg_total);
    if (avg_total < best_total) {
      best_total = avg_total;
      const auto avg = [nq](std::int64_t v) {
        return static_cast<std::int64_t>(static_cast<double>(v) / nq);
      };
      report.best_average = {avg(sum.routing_ns), avg(sum.token_retrieval_ns), avg(sum.scatter_ns),
                             avg(sum.sort_ns), avg(sum.total_ns)};
    }
  }
  report.mean_over_trials_ns =
      std::accumulate(report.trial_average_total_ns.begin(), report.trial_average_total_ns.end(), 0.0) /
      static_cast<double>(trials);
  return report;
}

}  // namespace lexroute
