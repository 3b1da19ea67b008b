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

// Small builders shared by the test binaries.

#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lexroute/router.hpp"
#include "lexroute/synthetic.hpp"
#include "lexroute/types.hpp"

namespace fixtures {

inline lexroute::RoutedToken token(std::int32_t tid, std::vector<float> vec,
                                   std::vector<lexroute::Route> routes = {}) {
  lexroute::RoutedToken t;
  t.token_id = tid;
  t.vector = std::move(vec);
  t.routes = std::move(routes);
  return t;
}

inline lexroute::EncodedSequence sequence(std::string id, std::vector<lexroute::RoutedToken> tokens,
                                          std::optional<std::vector<float>> cls = std::nullopt) {
  lexroute::EncodedSequence s;
  s.id = std::move(id);
  s.tokens = std::move(tokens);
  for (std::size_t i = 0; i < s.tokens.size(); ++i) s.tokens[i].position = static_cast<std::uint32_t>(i);
  s.cls = std::move(cls);
  return s;
}

/// Synthetic corpus with documents routed to `doc_keys` keys and queries to
/// `query_keys` keys by a seeded random router.
struct RoutedCorpus {
  lexroute::SyntheticData data;
  lexroute::RouterParams router;
};

inline RoutedCorpus routed_corpus(const lexroute::SyntheticConfig& config, std::uint32_t key_count,
                                  std::uint64_t router_seed, std::size_t doc_keys = 5,
                                  std::size_t query_keys = 1, float bias = 0.0f) {
  RoutedCorpus out;
  out.data = lexroute::generate_synthetic(config);
  out.router = lexroute::RouterParams::random(static_cast<std::uint32_t>(config.dim), key_count,
                                              router_seed, 1.0f, bias);
  for (auto& d : out.data.docs) lexroute::route_sequence(d, lexroute::Scheme::kDynamic, &out.router, doc_keys);
  for (auto& q : out.data.queries)
    lexroute::route_sequence(q, lexroute::Scheme::kDynamic, &out.router, query_keys);
  return out;
}

inline double relative_difference(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path = std::filesystem::temp_directory_path() / ("lexroute-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace fixtures
