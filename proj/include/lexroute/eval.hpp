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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lexroute/scoring.hpp"

namespace lexroute {

/// query id -> doc id -> graded relevance (>= 0).
using Qrels = std::map<std::string, std::map<std::string, int>>;

struct RunEntry {
  std::string doc_id;
  std::size_t rank = 0;
  double score = 0.0;
};

/// query id -> entries sorted by rank, ranks 1..n.
using RunFile = std::map<std::string, std::vector<RunEntry>>;

enum class MissingQrels {
  kSkip,  // queries absent from qrels are not evaluated
  kZero,  // they count as a zero score
};

struct MetricOptions {
  std::size_t cutoff = 10;
  /// Binary relevance for MRR and recall: grade >= threshold.
  int relevance_threshold = 1;
  MissingQrels missing = MissingQrels::kSkip;
};

struct MetricResult {
  double value = 0.0;
  std::size_t evaluated = 0;
  /// Run queries absent from qrels, or with nothing relevant to find.
  std::size_t skipped = 0;
};

MetricResult metric_mrr(const RunFile& run, const Qrels& qrels,
                        MetricOptions options);
/// Gain 2^grade - 1, discount log2(rank + 1). Queries with a zero ideal DCG
/// are skipped.
MetricResult metric_ndcg(const RunFile& run, const Qrels& qrels,
                         MetricOptions options);
/// Queries without relevant documents are skipped.
MetricResult metric_recall(const RunFile& run, const Qrels& qrels,
                           MetricOptions options);

RunFile make_run(
    std::span<const std::pair<std::string, std::vector<RankedDoc>>> results);

/// `query_id doc_id rank score` per line.
RunFile read_run(const std::filesystem::path& path);
void write_run(const RunFile& run, const std::filesystem::path& path);

/// `query_id doc_id grade`, or the four-column TREC form
/// `query_id iteration doc_id grade`.
Qrels read_qrels(const std::filesystem::path& path);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);

}  // namespace lexroute
