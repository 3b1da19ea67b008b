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
#include <filesystem>
#include <span>
#include <vector>

#include "lexroute/types.hpp"

namespace lexroute {

/// Linear router over token embeddings. `weights` is the (dim x key_count)
/// matrix in row-major order, so W[i][k] lives at i * key_count + k.
struct RouterParams {
  std::uint32_t dim = 0;
  std::uint32_t key_count = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  static RouterParams zeros(std::uint32_t dim, std::uint32_t key_count);
  /// Gaussian weights with the given standard deviation and a constant bias.
  static RouterParams random(std::uint32_t dim, std::uint32_t key_count,
                             std::uint64_t seed, float stddev = 1.0f,
                             float bias = 0.0f);

  /// Throws unless shapes are consistent and every entry is finite.
  void validate() const;
};

/// Non-negative per-key weights log(1 + max(0, W^T v + b)).
std::vector<float> router_representation(std::span<const float> vector,
                                         const RouterParams& params);

/// Up to `max_keys` strictly positive entries of `representation`, sorted by
/// descending weight with ties broken by ascending key.
std::vector<Route> select_top_keys(std::span<const float> representation,
                                   std::size_t max_keys);

/// Elementwise maximum over token-level representations.
std::vector<float> pool_router_representations(
    std::span<const std::vector<float>> representations);

/// Assigns routes to every token of `sequence` according to `scheme`.
///
/// kDynamic uses `router` (required) and keeps the top `max_keys` positive
/// keys. kStatic routes each token to its own token id with weight 1,
/// kAllToAll routes every token to key 0 with weight 1, and kSingle clears
/// all token routes.
void route_sequence(EncodedSequence& sequence, Scheme scheme,
                    const RouterParams* router, std::size_t max_keys);

/// Copy of `sequence` with every route of weight <= tau removed.
EncodedSequence drop_routes_at_or_below(const EncodedSequence& sequence,
                                        float tau);

void save_router(const RouterParams& params, const std::filesystem::path& path);
RouterParams load_router(const std::filesystem::path& path);

}  // namespace lexroute
