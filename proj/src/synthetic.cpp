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

#include "lexroute/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lexroute/common.hpp"

namespace lexroute {

void SyntheticConfig::validate() const {
  require(docs >= 1 && tokens_per_doc >= 1 && dim >= 1 && vocab >= 1 && cluster_count >= 1,
          ErrorCode::kInvalidArgument, "synthetic: sizes must be positive");
  require(query_tokens >= 1 || queries == 0, ErrorCode::kInvalidArgument,
          "synthetic: query_tokens must be positive");
  require(std::isfinite(skew) && skew >= 0.0, ErrorCode::kInvalidArgument,
          "synthetic: skew must be finite and >= 0");
  require(std::isfinite(noise) && noise >= 0.0, ErrorCode::kInvalidArgument,
          "synthetic: noise must be finite and >= 0");
}

std::vector<double> zipf_probabilities(std::size_t vocab, double skew) {
  std::vector<double> p(vocab);
  for (std::size_t r = 0; r < vocab; ++r) p[r] = std::pow(static_cast<double>(r + 1), -skew);
  const double z = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= z;
  return p;
}

SyntheticData generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  const std::size_t dim = config.dim;

  std::vector<float> centers(config.cluster_count * dim);
  for (auto& x : centers) x = normal(rng);
  std::uniform_int_distribution<std::size_t> pick_cluster(0, config.cluster_count - 1);
  std::vector<float> anchors(config.vocab * dim);
  for (std::size_t t = 0; t < config.vocab; ++t) {
    const std::size_t c = pick_cluster(rng);
    for (std::size_t i = 0; i < dim; ++i) anchors[t * dim + i] = centers[c * dim + i] + 0.5f * normal(rng);
  }

  const auto probs = zipf_probabilities(config.vocab, config.skew);
  std::discrete_distribution<std::int32_t> zipf(probs.begin(), probs.end());
  const auto noise = static_cast<float>(config.noise);

  auto mean_vector = [dim](const EncodedSequence& s) {
    std::vector<float> m(dim, 0.0f);
    for (const auto& t : s.tokens)
      for (std::size_t i = 0; i < dim; ++i) m[i] += t.vector[i];
    for (auto& x : m) x /= static_cast<float>(std::max<std::size_t>(1, s.tokens.size()));
    return m;
  };

  SyntheticData data;
  data.docs.resize(config.docs);
  for (std::size_t d = 0; d < config.docs; ++d) {
    auto& doc = data.docs[d];
    doc.id = "d" + std::to_string(d);
    doc.tokens.resize(config.tokens_per_doc);
    for (std::size_t j = 0; j < config.tokens_per_doc; ++j) {
      auto& tok = doc.tokens[j];
      tok.token_id = zipf(rng);
      tok.position = static_cast<std::uint32_t>(j);
      tok.vector.resize(dim);
      for (std::size_t i = 0; i < dim; ++i)
        tok.vector[i] = anchors[tok.token_id * dim + i] + noise * normal(rng);
    }
    if (config.with_cls) doc.cls = mean_vector(doc);
  }

  std::uniform_int_distribution<std::size_t> pick_doc(0, config.docs - 1);
  std::uniform_int_distribution<std::size_t> pick_token(0, config.tokens_per_doc - 1);
  std::uniform_int_distribution<int> pick_grade(1, 3);
  data.queries.resize(config.queries);
  for (std::size_t q = 0; q < config.queries; ++q) {
    auto& query = data.queries[q];
    query.id = "q" + std::to_string(q);
    const auto& target = data.docs[pick_doc(rng)];
    query.tokens.resize(config.query_tokens);
    for (std::size_t j = 0; j < config.query_tokens; ++j) {
      const auto& src = target.tokens[pick_token(rng)];
      auto& tok = query.tokens[j];
      tok.token_id = src.token_id;
      tok.position = static_cast<std::uint32_t>(j);
      tok.vector.resize(dim);
      for (std::size_t i = 0; i < dim; ++i) tok.vector[i] = src.vector[i] + noise * normal(rng);
    }
    if (config.with_cls) query.cls = mean_vector(query);
    data.qrels[query.id][target.id] = pick_grade(rng);
  }
  return data;
}

}  // namespace lexroute
