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

#include <fstream>
#include <limits>
#include <numeric>

#include "fixtures.hpp"
#include "lexroute/common.hpp"
#include "lexroute/index.hpp"

using namespace lexroute;
using fixtures::sequence;
using fixtures::token;

namespace {

SyntheticConfig small_config(std::uint64_t seed, bool with_cls = false) {
  SyntheticConfig c;
  c.docs = 40;
  c.tokens_per_doc = 12;
  c.dim = 6;
  c.vocab = 30;
  c.queries = 5;
  c.query_tokens = 4;
  c.with_cls = with_cls;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("build_index: boundary weight equal to tau is pruned") {
  const std::vector<EncodedDocument> docs{
      sequence("a", {token(0, {1, 2}, {{0, 0.9f}, {1, 0.95f}})})};
  const auto index = build_index(docs, {.tau = 0.9f});
  CHECK(index.postings[0].size() == 0);
  REQUIRE(index.postings[1].size() == 1);
  CHECK(index.postings[1].weights[0] == 0.95f);
  CHECK(index.postings[1].vectors == std::vector<float>{0.95f * 1, 0.95f * 2});
}

TEST_CASE("build_index: infinite tau keeps only the sequence vectors") {
  const auto data = generate_synthetic(small_config(1, true));
  auto docs = data.docs;
  for (auto& d : docs) route_sequence(d, Scheme::kStatic, nullptr, 1);
  const auto index = build_index(docs, {.tau = std::numeric_limits<float>::infinity(), .with_cls = true});
  CHECK(index.total_entries() == 0);
  CHECK(index.cls_store.size() == docs.size() * index.meta.cls_dim);
  CHECK(index.meta.cls_dim == 6);
}

TEST_CASE("build_index: route enumeration at tau 1.0") {
  std::vector<EncodedDocument> docs;
  std::size_t heavy = 0;
  for (int d = 0; d < 3; ++d) {
    std::vector<RoutedToken> tokens;
    for (int t = 0; t < 4; ++t) {
      std::vector<Route> routes;
      const std::uint32_t k = static_cast<std::uint32_t>((d + t) % 5);
      if ((d + t) % 3 != 0) {
        routes.push_back({k, 1.2f});
        ++heavy;
      }
      if (t % 2 == 0) routes.push_back({(k + 1) % 5, 0.5f});
      tokens.push_back(token(t, {1, 0, 0}, routes));
    }
    docs.push_back(sequence("d" + std::to_string(d), tokens));
  }
  const auto index = build_index(docs, {.tau = 1.0f, .key_count = 5});
  CHECK(index.total_entries() == heavy);
}

TEST_CASE("build_index rejects malformed input") {
  const auto doc = sequence("a", {token(0, {1, 2}, {{3, 1.0f}})});
  CHECK_THROWS_AS(build_index(std::vector{doc}, {.tau = -1.0f}), Error);
  CHECK_THROWS_AS(build_index(std::vector{doc, doc}, {}), Error);
  CHECK_THROWS_AS(build_index(std::vector{doc}, {.key_count = 2}), Error);
  CHECK_THROWS_AS(build_index(std::vector{doc}, {.with_cls = true}), Error);
  const auto other = sequence("b", {token(0, {1, 2, 3}, {{0, 1.0f}})});
  CHECK_THROWS_AS(build_index(std::vector{doc, other}, {}), Error);
}

TEST_CASE("postings are sorted by doc id and independent of the thread count") {
  const auto rc = fixtures::routed_corpus(small_config(4), 12, 99);
  const auto one = build_index(rc.data.docs, {.tau = 0.1f, .key_count = 12, .threads = 1});
  for (const auto& list : one.postings)
    CHECK(std::is_sorted(list.doc_ids.begin(), list.doc_ids.end()));
  for (std::size_t threads : {2, 3, 7, 64}) {
    const auto many = build_index(rc.data.docs, {.tau = 0.1f, .key_count = 12, .threads = threads});
    CHECK(many == one);
  }
}

TEST_CASE("prune_index equals a fresh build") {
  const auto rc = fixtures::routed_corpus(small_config(5, true), 12, 7);
  const auto base = build_index(rc.data.docs, {.tau = 0.0f, .with_cls = true, .key_count = 12});
  std::size_t previous = base.total_entries();
  for (float tau : {0.0f, 0.5f, 0.9f, 1.1f, 1.5f}) {
    const auto fresh = build_index(rc.data.docs, {.tau = tau, .with_cls = true, .key_count = 12});
    CHECK(prune_index(base, tau) == fresh);
    CHECK(fresh.total_entries() <= previous);
    previous = fresh.total_entries();
  }
  CHECK(prune_index(base, 0.0f) == base);
  CHECK_THROWS_AS(prune_index(prune_index(base, 0.5f), 0.2f), Error);
}

TEST_CASE("prune above every weight empties the postings") {
  const std::vector<EncodedDocument> docs{
      sequence("a", {token(0, {1}, {{0, 1.4f}}), token(1, {2}, {{1, 0.3f}})})};
  CHECK(prune_index(build_index(docs, {}), 1.5f).total_entries() == 0);
}

TEST_CASE("index_stats") {
  SUBCASE("empty index") {
    const auto stats = index_stats(build_index(std::vector<EncodedDocument>{}, {.key_count = 4}));
    CHECK(stats.total_entries == 0);
    CHECK(stats.max_posting_length == 0);
    CHECK(stats.per_key_counts == std::vector<std::uint64_t>(5, 0));
    CHECK(stats.normalized_sizes == std::vector<double>(5, 0.0));
  }
  SUBCASE("balanced routing") {
    std::vector<EncodedDocument> docs;
    for (int d = 0; d < 4; ++d) {
      std::vector<RoutedToken> tokens;
      for (std::uint32_t k = 0; k < 4; ++k) tokens.push_back(token(0, {1}, {{k, 1.0f}}));
      docs.push_back(sequence("d" + std::to_string(d), tokens));
    }
    const auto stats = index_stats(build_index(docs, {}), docs);
    for (std::size_t k = 0; k < 4; ++k) CHECK(stats.normalized_sizes[k] == 0.25);
    CHECK(stats.activated_keys_histogram == std::vector<std::uint64_t>{0, 16});
  }
  SUBCASE("everything on key 0") {
    std::vector<EncodedDocument> docs{sequence("a", {token(0, {1}, {{0, 1.0f}}), token(0, {1}, {{0, 2.0f}})})};
    const auto stats = index_stats(build_index(docs, {.key_count = 3}));
    CHECK(stats.normalized_sizes == std::vector<double>{1, 0, 0, 0});
    CHECK(stats.max_posting_length == 2);
    CHECK(stats.nonempty_keys == 1);
  }
  SUBCASE("conservation on a routed corpus") {
    const auto rc = fixtures::routed_corpus(small_config(6, true), 12, 3);
    for (float tau : {0.0f, 0.7f}) {
      const auto stats = index_stats(build_index(rc.data.docs, {.tau = tau, .with_cls = true, .key_count = 12}),
                                     rc.data.docs);
      const std::uint64_t lexical =
          std::accumulate(stats.per_key_counts.begin(), stats.per_key_counts.end() - 1, std::uint64_t{0});
      CHECK(lexical == stats.total_entries);
      CHECK(stats.per_key_counts.back() == rc.data.docs.size());
      CHECK(std::accumulate(stats.activated_keys_histogram.begin(), stats.activated_keys_histogram.end(),
                            std::uint64_t{0}) == 40 * 12);
      std::uint64_t weighted = 0;
      for (std::size_t n = 0; n < stats.activated_keys_histogram.size(); ++n)
        weighted += n * stats.activated_keys_histogram[n];
      CHECK(weighted == stats.total_entries);
      CHECK(std::accumulate(stats.normalized_sizes.begin(), stats.normalized_sizes.end(), 0.0) ==
            doctest::Approx(1.0));
    }
  }
}

TEST_CASE("index serialization round trip") {
  fixtures::TempDir dir;
  SUBCASE("empty") {
    const auto empty = build_index(std::vector<EncodedDocument>{}, {.key_count = 3});
    save_index(empty, dir / "e.lxri");
    CHECK(load_index(dir / "e.lxri") == empty);
  }
  SUBCASE("routed corpus with sequence vectors") {
    const auto rc = fixtures::routed_corpus(small_config(8, true), 12, 1);
    const auto index = build_index(rc.data.docs, {.tau = 0.2f, .with_cls = true, .key_count = 12});
    save_index(index, dir / "i.lxri");
    const auto back = load_index(dir / "i.lxri");
    CHECK(back == index);
    CHECK(serialize_index(back) == serialize_index(index));
  }
}

TEST_CASE("index loading rejects corrupted files") {
  fixtures::TempDir dir;
  const auto rc = fixtures::routed_corpus(small_config(9), 12, 2);
  auto bytes = serialize_index(build_index(rc.data.docs, {.key_count = 12}));
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(deserialize_index(bad), Error);
  CHECK_THROWS_AS(deserialize_index(std::span(bytes).first(bytes.size() - 1)), Error);
  bytes.push_back(0);
  CHECK_THROWS_AS(deserialize_index(bytes), Error);
  {
    std::ofstream out(dir / "bad.lxri", std::ios::binary);
    out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
  }
  try {
    load_index(dir / "bad.lxri");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
  }
  CHECK_THROWS_AS(load_index(dir / "missing.lxri"), Error);
}
