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

#include <cmath>
#include <fstream>
#include <iterator>

#include "fixtures.hpp"
#include "lexroute/common.hpp"
#include "lexroute/embedding_io.hpp"
#include "lexroute/synthetic.hpp"

using namespace lexroute;

namespace {

bool same(const EncodedSequence& a, const EncodedSequence& b) {
  if (a.id != b.id || a.cls != b.cls || a.tokens.size() != b.tokens.size()) return false;
  for (std::size_t i = 0; i < a.tokens.size(); ++i) {
    const auto& x = a.tokens[i];
    const auto& y = b.tokens[i];
    if (x.token_id != y.token_id || x.vector != y.vector || x.routes != y.routes) return false;
  }
  return true;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<EncodedSequence> routed_sample() {
  SyntheticConfig c;
  c.docs = 6;
  c.tokens_per_doc = 5;
  c.dim = 4;
  c.with_cls = true;
  c.queries = 0;
  auto rc = fixtures::routed_corpus(c, 9, 3, 3);
  return rc.data.docs;
}

}  // namespace

TEST_CASE("embedding record parsing") {
  const auto s = parse_embedding_record(
      R"({"id": "d1", "cls": [0.5, 1], "tokens": [{"tid": 7, "vec": [1, 2]}, {"tid": 3, "vec": [0, -1], "routes": [[4, 0.25]]}]})");
  CHECK(s.id == "d1");
  CHECK(s.cls == std::vector<float>{0.5f, 1.0f});
  REQUIRE(s.tokens.size() == 2);
  CHECK(s.tokens[0].token_id == 7);
  CHECK(s.tokens[1].position == 1);
  CHECK(s.tokens[1].routes == std::vector<Route>{{4, 0.25f}});
  CHECK(same(parse_embedding_record(format_embedding_record(s)), s));

  CHECK_THROWS_AS(parse_embedding_record("{"), Error);
  CHECK_THROWS_AS(parse_embedding_record(R"({"tokens": []})"), Error);
  CHECK_THROWS_AS(parse_embedding_record(R"({"id": "x", "tokens": [{"tid": 1}]})"), Error);
  CHECK_THROWS_AS(parse_embedding_record(R"({"id": "x", "tokens": [{"tid": 1, "vec": ["a"]}]})"), Error);
  CHECK_THROWS_AS(parse_embedding_record(R"({"id": "x", "tokens": [{"tid": 1, "vec": [1], "routes": [[-1, 1]]}]})"),
                  Error);
}

TEST_CASE("embedding files round trip in both formats") {
  fixtures::TempDir dir;
  const auto docs = routed_sample();
  write_embeddings_jsonl(docs, dir / "a.jsonl");
  write_embeddings_binary(docs, dir / "a.ctem");
  for (const auto& name : {"a.jsonl", "a.ctem"}) {
    const auto back = read_embeddings(dir / name);
    REQUIRE(back.size() == docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) CHECK(same(back[i], docs[i]));
  }
  CHECK(slurp(dir / "a.ctem").substr(0, 4) == "CTEM");
  const auto bytes = serialize_embeddings(docs);
  CHECK(serialize_embeddings(deserialize_embeddings(bytes)) == bytes);
}

TEST_CASE("embedding validation and corruption") {
  auto docs = routed_sample();
  validate_embeddings(docs);
  auto bad = docs;
  bad[1].tokens[0].vector.push_back(1.0f);
  CHECK_THROWS_AS(validate_embeddings(bad), Error);
  bad = docs;
  bad[2].tokens[1].vector[0] = std::nanf("");
  CHECK_THROWS_AS(validate_embeddings(bad), Error);
  bad = docs;
  bad[0].cls->pop_back();
  CHECK_THROWS_AS(validate_embeddings(bad), Error);

  const auto bytes = serialize_embeddings(docs);
  for (std::size_t cut = 0; cut < bytes.size(); cut += 7)
    CHECK_THROWS_AS(deserialize_embeddings(std::span(bytes).first(cut)), Error);

  fixtures::TempDir dir;
  {
    std::ofstream out(dir / "bad.jsonl");
    out << format_embedding_record(docs[0]) << "\n{not json}\n";
  }
  try {
    read_embeddings(dir / "bad.jsonl");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("synthetic corpus is deterministic") {
  fixtures::TempDir dir;
  SyntheticConfig c;
  c.with_cls = true;
  const auto a = generate_synthetic(c);
  const auto b = generate_synthetic(c);
  write_embeddings_binary(a.docs, dir / "a.ctem");
  write_embeddings_binary(b.docs, dir / "b.ctem");
  write_embeddings_jsonl(a.queries, dir / "a.jsonl");
  write_embeddings_jsonl(b.queries, dir / "b.jsonl");
  CHECK(slurp(dir / "a.ctem") == slurp(dir / "b.ctem"));
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));
  CHECK(a.qrels == b.qrels);
  CHECK(a.qrels.size() == c.queries);
  c.seed += 1;
  write_embeddings_binary(generate_synthetic(c).docs, dir / "c.ctem");
  CHECK(slurp(dir / "a.ctem") != slurp(dir / "c.ctem"));
}

TEST_CASE("synthetic token ids follow the Zipf law") {
  SUBCASE("skew 0 is near uniform") {
    SyntheticConfig c;
    c.docs = 1000;
    c.tokens_per_doc = 50;
    c.vocab = 20;
    c.queries = 0;
    c.skew = 0.0;
    std::vector<double> counts(c.vocab, 0.0);
    for (const auto& d : generate_synthetic(c).docs)
      for (const auto& t : d.tokens) counts[t.token_id] += 1.0;
    const double expected = 50000.0 / 20.0;
    for (double n : counts) CHECK(std::abs(n - expected) < 5.0 * std::sqrt(expected));
  }
  SUBCASE("skew 1.2 over 100 ids") {
    SyntheticConfig c;
    c.docs = 4000;
    c.tokens_per_doc = 50;
    c.vocab = 100;
    c.queries = 0;
    c.skew = 1.2;
    std::vector<double> counts(c.vocab, 0.0);
    for (const auto& d : generate_synthetic(c).docs)
      for (const auto& t : d.tokens) counts[t.token_id] += 1.0;
    const auto p = zipf_probabilities(100, 1.2);
    CHECK(p[0] / p[49] == doctest::Approx(std::pow(50.0, 1.2)).epsilon(1e-12));
    const double total = 200000.0;
    for (std::size_t r : {0, 49}) {
      const double sd = std::sqrt(total * p[r] * (1 - p[r]));
      CHECK(std::abs(counts[r] - total * p[r]) < 5.0 * sd);
    }
    const double ratio = counts[0] / counts[49];
    CHECK(ratio == doctest::Approx(std::pow(50.0, 1.2)).epsilon(0.15));
  }
}

TEST_CASE("synthetic config validation") {
  SyntheticConfig c;
  c.dim = 0;
  CHECK_THROWS_AS(generate_synthetic(c), Error);
  c = {};
  c.skew = -1.0;
  CHECK_THROWS_AS(generate_synthetic(c), Error);
}
