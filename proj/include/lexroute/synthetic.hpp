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
#include <vector>

#include "lexroute/eval.hpp"
#include "lexroute/types.hpp"

namespace lexroute {

/// Desk-scale corpus generator. Token ids follow a Zipf law with exponent
/// `skew` (0 gives uniform ids); each id belongs to one of `cluster_count`
/// Gaussian clusters and its contextual vectors scatter around a fixed
/// per-id anchor. Each query samples tokens from one target document, which
/// becomes its relevant document in the qrels.
struct SyntheticConfig {
  std::size_t docs = 100;
  std::size_t tokens_per_doc = 30;
  std::size_t dim = 8;
  std::size_t vocab = 50;
  std::size_t cluster_count = 8;
  double skew = 1.0;
  std::size_t queries = 20;
  std::size_t query_tokens = 6;
  bool with_cls = false;
  double noise = 0.3;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SyntheticData {
  std::vector<EncodedDocument> docs;
  std::vector<EncodedQuery> queries;
  Qrels qrels;
};

/// Deterministic for a given config. Sequences come back unrouted.
SyntheticData generate_synthetic(const SyntheticConfig& config);

/// Zipf probabilities over ranks 1..vocab (index 0 is rank 1).
std::vector<double> zipf_probabilities(std::size_t vocab, double skew);

}  // namespace lexroute
