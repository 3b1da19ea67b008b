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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "lexroute/common.hpp"
#include "lexroute/router.hpp"

using namespace lexroute;

namespace {

RouterParams params(std::uint32_t dim, std::uint32_t keys, std::vector<float> w, std::vector<float> b) {
  RouterParams p;
  p.dim = dim;
  p.key_count = keys;
  p.weights = std::move(w);
  p.bias = std::move(b);
  return p;
}

}  // namespace

TEST_CASE("router representation: zero parameters give zeros") {
  const auto p = RouterParams::zeros(3, 4);
  const auto rep = router_representation(std::vector<float>{1.5f, -2.0f, 7.0f}, p);
  CHECK(rep == std::vector<float>(4, 0.0f));
}

TEST_CASE("router representation: hand values") {
  const auto one = router_representation(std::vector<float>{1.0f}, params(1, 1, {1.0f}, {0.0f}));
  REQUIRE(one.size() == 1);
  CHECK(one[0] == doctest::Approx(0.693147).epsilon(1e-6));

  const auto clamped = router_representation(std::vector<float>{1.0f}, params(1, 2, {-3.0f, 2.0f}, {0.0f, -2.0f}));
  CHECK(clamped == std::vector<float>{0.0f, 0.0f});
}

TEST_CASE("router representation: matches log1p(relu(W^T v + b)) and is non-negative") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint32_t dim = 1 + trial % 7, keys = 1 + trial % 5;
    const auto p = RouterParams::random(dim, keys, 100 + trial, 1.0f, 0.1f);
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(n(rng));
    const auto rep = router_representation(v, p);
    for (std::uint32_t k = 0; k < keys; ++k) {
      double z = p.bias[k];
      for (std::uint32_t i = 0; i < dim; ++i) z += double(p.weights[i * keys + k]) * v[i];
      CHECK(rep[k] >= 0.0f);
      CHECK(rep[k] == doctest::Approx(std::log1p(std::max(0.0, z))).epsilon(1e-6));
    }
  }
}

TEST_CASE("router representation: log saturation is sub-linear") {
  for (double x : {0.01, 0.5, 3.0, 40.0})
    for (double lambda : {1.5, 2.0, 10.0}) CHECK(std::log1p(lambda * x) < lambda * std::log1p(x));
}

TEST_CASE("router representation: dimension mismatch throws") {
  const auto p = RouterParams::zeros(3, 2);
  CHECK_THROWS_AS(router_representation(std::vector<float>{1.0f, 2.0f}, p), Error);
}

TEST_CASE("select_top_keys") {
  CHECK(select_top_keys(std::vector<float>{0, 0, 0}, 5).empty());
  const std::vector<float> rep{0.2f, 0.9f, 0.9f, 0.0f};
  CHECK(select_top_keys(rep, 1) == std::vector<Route>{{1, 0.9f}});
  CHECK(select_top_keys(rep, 3) == std::vector<Route>{{1, 0.9f}, {2, 0.9f}, {0, 0.2f}});
  CHECK(select_top_keys(rep, 10) == std::vector<Route>{{1, 0.9f}, {2, 0.9f}, {0, 0.2f}});
  CHECK_THROWS_AS(select_top_keys(rep, 0), Error);
}

TEST_CASE("select_top_keys matches a sort-then-truncate oracle") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> level(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<float> rep(1 + trial % 9);
    for (auto& x : rep) x = 0.25f * static_cast<float>(level(rng));  // plenty of ties
    const std::size_t max_keys = 1 + trial % 4;
    std::vector<Route> expected;
    for (std::uint32_t k = 0; k < rep.size(); ++k)
      if (rep[k] > 0) expected.push_back({k, rep[k]});
    std::stable_sort(expected.begin(), expected.end(),
                     [](const Route& a, const Route& b) { return a.weight > b.weight; });
    if (expected.size() > max_keys) expected.resize(max_keys);
    CHECK(select_top_keys(rep, max_keys) == expected);
    CHECK(select_top_keys(rep, max_keys) == select_top_keys(rep, max_keys));
  }
}

TEST_CASE("pool_router_representations") {
  using V = std::vector<float>;
  CHECK(pool_router_representations(std::vector<V>{{1, 0}, {0, 2}}) == V{1, 2});
  CHECK(pool_router_representations(std::vector<V>{{0.3f, 4}}) == V{0.3f, 4});
  CHECK(pool_router_representations(std::vector<V>{{0.5f, 0.1f}, {0.4f, 0.3f}, {0.5f, 0.2f}}) == V{0.5f, 0.3f});
  CHECK_THROWS_AS(pool_router_representations(std::vector<V>{}), Error);
  CHECK_THROWS_AS(pool_router_representations(std::vector<V>{{1, 2}, {1}}), Error);
}

TEST_CASE("pooling is permutation invariant") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<float> u(0.0f, 3.0f);
  std::vector<std::vector<float>> reps(6, std::vector<float>(4));
  for (auto& r : reps)
    for (auto& x : r) x = u(rng);
  const auto pooled = pool_router_representations(reps);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(reps.begin(), reps.end(), rng);
    CHECK(pool_router_representations(reps) == pooled);
  }
}

TEST_CASE("route_sequence schemes") {
  auto seq = fixtures::sequence("d", {fixtures::token(7, {1, 0}), fixtures::token(3, {0, 1})});
  route_sequence(seq, Scheme::kStatic, nullptr, 1);
  CHECK(seq.tokens[0].routes == std::vector<Route>{{7, 1.0f}});
  CHECK(seq.tokens[1].routes == std::vector<Route>{{3, 1.0f}});
  route_sequence(seq, Scheme::kAllToAll, nullptr, 1);
  CHECK(seq.tokens[0].routes == std::vector<Route>{{0, 1.0f}});
  route_sequence(seq, Scheme::kSingle, nullptr, 1);
  CHECK(seq.tokens[0].routes.empty());
  CHECK_THROWS_AS(route_sequence(seq, Scheme::kDynamic, nullptr, 1), Error);

  const auto p = params(2, 3, {1, 0, 2, 0, 1, 0}, {0, 0, 0});
  route_sequence(seq, Scheme::kDynamic, &p, 5);
  // token [1,0] -> z = [1,0,2]; token [0,1] -> z = [0,1,0]
  CHECK(seq.tokens[0].routes == std::vector<Route>{{2, static_cast<float>(std::log1p(2.0))}, {0, static_cast<float>(std::log1p(1.0))}});
  CHECK(seq.tokens[1].routes == std::vector<Route>{{1, static_cast<float>(std::log1p(1.0))}});
}

TEST_CASE("drop_routes_at_or_below is strict") {
  auto seq = fixtures::sequence("d", {fixtures::token(1, {1}, {{0, 0.9f}, {1, 0.5f}, {2, 1.2f}})});
  const auto kept = drop_routes_at_or_below(seq, 0.9f);
  CHECK(kept.tokens[0].routes == std::vector<Route>{{2, 1.2f}});
}

TEST_CASE("router file round trip and corruption") {
  fixtures::TempDir dir;
  const auto p = RouterParams::random(5, 7, 3, 0.5f, -0.25f);
  save_router(p, dir / "r.lxrt");
  const auto q = load_router(dir / "r.lxrt");
  CHECK(q.dim == p.dim);
  CHECK(q.key_count == p.key_count);
  CHECK(q.weights == p.weights);
  CHECK(q.bias == p.bias);

  {
    std::ofstream out(dir / "bad.lxrt", std::ios::binary);
    out << "LXRX";
  }
  CHECK_THROWS_AS(load_router(dir / "bad.lxrt"), Error);
  CHECK_THROWS_AS(load_router(dir / "missing.lxrt"), Error);
}
