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

#include "lexroute/router.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "binary_io.hpp"
#include "lexroute/common.hpp"

namespace lexroute {
namespace {

constexpr char kRouterMagic[] = "LXRT";
constexpr std::uint32_t kRouterVersion = 1;

}  // namespace

RouterParams RouterParams::zeros(std::uint32_t dim, std::uint32_t key_count) {
  RouterParams p;
  p.dim = dim;
  p.key_count = key_count;
  p.weights.assign(std::size_t{dim} * key_count, 0.0f);
  p.bias.assign(key_count, 0.0f);
  p.validate();
  return p;
}

RouterParams RouterParams::random(std::uint32_t dim, std::uint32_t key_count,
                                  std::uint64_t seed, float stddev,
                                  float bias) {
  RouterParams p = zeros(dim, key_count);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, stddev);
  for (auto& w : p.weights) w = normal(rng);
  std::fill(p.bias.begin(), p.bias.end(), bias);
  return p;
}

void RouterParams::validate() const {
  require(dim >= 1 && key_count >= 1, ErrorCode::kInvalidArgument,
          "router: dim and key_count must be >= 1");
  require(weights.size() == std::size_t{dim} * key_count &&
              bias.size() == key_count,
          ErrorCode::kDimensionMismatch, "router: parameter shapes disagree");
  const auto finite = [](float x) { return std::isfinite(x); };
  require(std::all_of(weights.begin(), weights.end(), finite) &&
              std::all_of(bias.begin(), bias.end(), finite),
          ErrorCode::kNumeric, "router: non-finite parameter");
}

std::vector<float> router_representation(std::span<const float> vector,
                                         const RouterParams& params) {
  require(vector.size() == params.dim, ErrorCode::kDimensionMismatch,
          "router_representation: vector dimension does not match router");
  std::vector<double> pre(params.bias.begin(), params.bias.end());
  for (std::size_t i = 0; i < params.dim; ++i) {
    const double x = vector[i];
    if (x == 0.0) continue;
    const float* row = params.weights.data() + i * params.key_count;
    for (std::size_t k = 0; k < params.key_count; ++k) pre[k] += x * row[k];
  }
  std::vector<float> out(params.key_count);
  for (std::size_t k = 0; k < params.key_count; ++k)
    out[k] = static_cast<float>(std::log1p(std::max(0.0, pre[k])));
  return out;
}

std::vector<Route> select_top_keys(std::span<const float> representation,
                                   std::size_t max_keys) {
  require(max_keys >= 1, ErrorCode::kInvalidArgument,
          "select_top_keys: max_keys must be >= 1");
  std::vector<Route> routes;
  for (std::size_t k = 0; k < representation.size(); ++k)
    if (representation[k] > 0.0f)
      routes.push_back({static_cast<std::uint32_t>(k), representation[k]});
  const auto before = [](const Route& a, const Route& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.key < b.key;
  };
  if (routes.size() > max_keys) {
    std::partial_sort(routes.begin(), routes.begin() + max_keys, routes.end(),
                      before);
    routes.resize(max_keys);
  } else {
    std::sort(routes.begin(), routes.end(), before);
  }
  return routes;
}

std::vector<float> pool_router_representations(
    std::span<const std::vector<float>> representations) {
  require(!representations.empty(), ErrorCode::kInvalidArgument,
          "pool_router_representations: empty sequence");
  std::vector<float> pooled = representations.front();
  for (const auto& rep : representations.subspan(1)) {
    require(rep.size() == pooled.size(), ErrorCode::kDimensionMismatch,
            "pool_router_representations: lengths differ");
    for (std::size_t k = 0; k < rep.size(); ++k)
      pooled[k] = std::max(pooled[k], rep[k]);
  }
  return pooled;
}

void route_sequence(EncodedSequence& sequence, Scheme scheme,
                    const RouterParams* router, std::size_t max_keys) {
  for (auto& token : sequence.tokens) {
    token.routes.clear();
    switch (scheme) {
      case Scheme::kSingle:
        break;
      case Scheme::kAllToAll:
        token.routes.push_back({0, 1.0f});
        break;
      case Scheme::kStatic:
        require(token.token_id >= 0, ErrorCode::kInvalidArgument,
                "route_sequence: negative token id");
        token.routes.push_back({static_cast<std::uint32_t>(token.token_id), 1.0f});
        break;
      case Scheme::kDynamic:
        require(router != nullptr, ErrorCode::kInvalidArgument,
                "route_sequence: dynamic routing needs router parameters");
        token.routes =
            select_top_keys(router_representation(token.vector, *router), max_keys);
        break;
    }
  }
}

EncodedSequence drop_routes_at_or_below(const EncodedSequence& sequence,
                                        float tau) {
  EncodedSequence out = sequence;
  for (auto& token : out.tokens)
    std::erase_if(token.routes, [tau](const Route& r) { return !(r.weight > tau); });
  return out;
}

void save_router(const RouterParams& params,
                 const std::filesystem::path& path) {
  params.validate();
  detail::ByteWriter w;
  w.put_magic({kRouterMagic, 4});
  w.put(kRouterVersion);
  w.put(params.dim);
  w.put(params.key_count);
  w.put_span(std::span<const float>(params.weights));
  w.put_span(std::span<const float>(params.bias));
  detail::atomic_write(path, w.bytes());
}

RouterParams load_router(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, "router file " + path.string());
  r.expect_magic({kRouterMagic, 4});
  if (r.get<std::uint32_t>() != kRouterVersion)
    fail(ErrorCode::kFormat, r.what() + ": unsupported version");
  RouterParams p;
  p.dim = r.get<std::uint32_t>();
  p.key_count = r.get<std::uint32_t>();
  require(p.dim >= 1 && p.key_count >= 1, ErrorCode::kFormat,
          "router file: zero dimension");
  r.need_elements(std::uint64_t{p.dim} * p.key_count + p.key_count, sizeof(float));
  p.weights.resize(std::size_t{p.dim} * p.key_count);
  p.bias.resize(p.key_count);
  r.get_into(std::span<float>(p.weights));
  r.get_into(std::span<float>(p.bias));
  if (!r.at_end()) fail(ErrorCode::kFormat, r.what() + ": trailing bytes");
  p.validate();
  return p;
}

}  // namespace lexroute
