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
#include <random>
#include <string>

#include "fixtures.hpp"
#include "gradient_suite.hpp"
#include "lexroute/common.hpp"
#include "lexroute/training.hpp"
#include "oracles.hpp"

using namespace lexroute;

namespace {

Matrix filled(std::size_t rows, std::size_t cols, double value) {
  Matrix m(rows, cols);
  for (auto& x : m.data) x = value;
  return m;
}

ToyTrainConfig quick_toy(std::uint64_t seed) {
  ToyTrainConfig c;
  c.seed = seed;
  c.steps = 10;
  return c;
}

}  // namespace

TEST_CASE("contrastive_loss") {
  const std::vector<double> one{0.3};
  CHECK(contrastive_loss(0.3, one) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const std::vector<double> two{0.0, 0.5};
  const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0 + std::exp(0.5)));
  CHECK(contrastive_loss(1.0, two) == doctest::Approx(expected).epsilon(1e-12));
  const std::vector<double> far{-800.0, -900.0};
  CHECK(contrastive_loss(0.0, far) == doctest::Approx(0.0).scale(1.0));
  CHECK(std::isfinite(contrastive_loss(1000.0, std::vector<double>{999.0})));
  CHECK(contrastive_loss(1000.0, std::vector<double>{999.0}) ==
        doctest::Approx(std::log1p(std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("router_contrastive_loss") {
  const std::vector<double> q{0.5, 1.0, 0.0}, p{1.0, 0.2, 3.0};
  CHECK(router_contrastive_loss(q, p, std::vector<std::vector<double>>{p}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const std::vector<double> zero(3, 0.0);
  const std::vector<std::vector<double>> negs{{1, 2, 3}, {0, 0, 1}, {4, 4, 4}};
  CHECK(router_contrastive_loss(zero, p, negs) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> qq(5), pp(5);
    std::vector<std::vector<double>> nn(3, std::vector<double>(5));
    for (auto& x : qq) x = u(rng);
    for (auto& x : pp) x = u(rng);
    for (auto& v : nn)
      for (auto& x : v) x = u(rng);
    const auto dotp = [](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    };
    std::vector<double> neg_scores;
    for (const auto& v : nn) neg_scores.push_back(dotp(qq, v));
    CHECK(router_contrastive_loss(qq, pp, nn) ==
          doctest::Approx(contrastive_loss(dotp(qq, pp), neg_scores)).epsilon(1e-12));
  }
}

TEST_CASE("max_pool takes the first maximizing row") {
  Matrix m(3, 2);
  m.data = {0.5, 0.1, 0.4, 0.3, 0.5, 0.2};
  std::vector<std::size_t> argmax;
  CHECK(max_pool(m, &argmax) == std::vector<double>{0.5, 0.3});
  CHECK(argmax == std::vector<std::size_t>{0, 1});
}

TEST_CASE("l1_loss") {
  CHECK(l1_loss(std::vector<Matrix>{filled(2, 3, 0.0)}) == 0.0);
  Matrix a(1, 3), b(3, 1);
  a.data = {1, 1, 1};
  b.data = {0.5, 2, 0.5};
  CHECK(l1_loss(std::vector<Matrix>{a, b}) == 3.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<Matrix> reps;
  for (std::size_t i = 0; i < 4; ++i) {
    Matrix m(2 + i, 5);
    for (auto& x : m.data) x = u(rng);
    reps.push_back(m);
  }
  double naive = 0.0;
  for (const auto& m : reps)
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c) naive += m.at(r, c);
  CHECK(l1_loss(reps) == doctest::Approx(naive / 4.0).epsilon(1e-12));

  for (double lambda : {0.0, 0.5, 3.0}) {
    auto scaled = reps;
    for (auto& m : scaled)
      for (auto& x : m.data) x *= lambda;
    CHECK(l1_loss(scaled) == doctest::Approx(lambda * l1_loss(reps)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("load_balance_loss hand cases") {
  CHECK(load_balance_loss(std::vector<Matrix>{filled(1, 2, 0.7)}) == doctest::Approx(0.5).epsilon(1e-12));

  for (std::size_t T : {1, 3, 6}) {
    Matrix saturated(T, 4);
    for (std::size_t t = 0; t < T; ++t) saturated.at(t, 0) = 60.0;
    CHECK(load_balance_loss(std::vector<Matrix>{saturated}) == doctest::Approx(double(T * T)).epsilon(1e-9));
  }
}

TEST_CASE("load_balance_loss: near-uniform logits beat aligned skew") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1e-3);
  const std::size_t T = 8, V = 4;
  Matrix uniform(T, V), skewed(T, V);
  for (auto& x : uniform.data) x = n(rng);
  for (std::size_t t = 0; t < T; ++t) skewed.at(t, 0) = 60.0;
  const double lu = load_balance_loss(std::vector<Matrix>{uniform});
  CHECK(lu == doctest::Approx(double(T * T) / V).epsilon(1e-2));
  CHECK(lu < load_balance_loss(std::vector<Matrix>{skewed}));
}

TEST_CASE("load_balance_loss is shift invariant per token") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Matrix> logits{oracle::random_matrix(rng, 5, 6), oracle::random_matrix(rng, 3, 6)};
    const double base = load_balance_loss(logits);
    std::uniform_real_distribution<double> shift(-10.0, 10.0);
    for (auto& m : logits)
      for (std::size_t t = 0; t < m.rows; ++t) {
        const double c = shift(rng);
        for (auto& x : m.row(t)) x += c;
      }
    CHECK(load_balance_loss(logits) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("total_loss: regularizer weights enter linearly") {
  const auto cfg = gradcheck::random_config(3);
  const auto zero = total_loss(cfg.batch, cfg.router, {0.0, 0.0}, cfg.limits);
  CHECK(zero.total == zero.contrastive + zero.router);

  const LossWeights w{0.3, 0.2};
  const auto once = total_loss(cfg.batch, cfg.router, w, cfg.limits);
  const auto twice = total_loss(cfg.batch, cfg.router, {0.6, 0.2}, cfg.limits);
  CHECK(twice.total - once.total == doctest::Approx(0.3 * once.balance).epsilon(1e-9));
  CHECK(once.total == doctest::Approx(once.contrastive + once.router + 0.3 * once.balance + 0.2 * once.sparsity)
                          .epsilon(1e-12));
}

TEST_CASE("total_loss rejects malformed batches") {
  auto cfg = gradcheck::random_config(4);
  cfg.batch.negatives.pop_back();
  CHECK_THROWS_AS(total_loss(cfg.batch, cfg.router, cfg.weights, cfg.limits), Error);
  auto bad_dim = gradcheck::random_config(5);
  bad_dim.router = LinearRouter::random(bad_dim.router.dim + 1, bad_dim.router.key_count, 1, 1.0, 0.0);
  CHECK_THROWS_AS(total_loss(bad_dim.batch, bad_dim.router, bad_dim.weights, bad_dim.limits), Error);
}

TEST_CASE("gradients match central differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    const auto cfg = gradcheck::random_config(seed);
    CHECK(kink_margin(cfg.batch, cfg.router, cfg.limits) >= gradcheck::kMinKinkMargin);
    const auto total = gradcheck::check_total(cfg);
    CHECK(total.checked > 0);
    CHECK(total.max_relative_error < 1e-4);
    CHECK(gradcheck::check_contrastive(seed).max_relative_error < 1e-4);
    CHECK(gradcheck::check_router_contrastive(seed).max_relative_error < 1e-4);
    CHECK(gradcheck::check_regularizers(seed).max_relative_error < 1e-4);
    const auto report = check_router_gradients(cfg.batch, cfg.router, cfg.weights, cfg.limits);
    CHECK(report.parameters == cfg.router.weights.size() + cfg.router.bias.size());
    CHECK(report.max_relative_error < 1e-4);
  }
}

TEST_CASE("LinearRouter conversions") {
  const auto r = LinearRouter::random(4, 3, 9, 0.5, -0.25);
  const auto back = LinearRouter::from_params(r.to_params());
  CHECK(back.dim == 4);
  CHECK(back.key_count == 3);
  for (std::size_t i = 0; i < r.weights.size(); ++i)
    CHECK(back.weights[i] == doctest::Approx(r.weights[i]).epsilon(1e-7));
  Matrix tokens(2, 4);
  tokens.data = {1, 0, 0, 0, 0, 0, 0, 2};
  const auto z = r.logits(tokens);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(z.at(0, k) == doctest::Approx(r.weights[k] + r.bias[k]));
    CHECK(z.at(1, k) == doctest::Approx(2 * r.weights[3 * 3 + k] + r.bias[k]));
  }
  const auto phi = router_activation(z);
  for (std::size_t i = 0; i < z.data.size(); ++i)
    CHECK(phi.data[i] == doctest::Approx(std::log1p(std::max(0.0, z.data[i]))));
}

TEST_CASE("posting_balance") {
  LinearRouter r;
  r.dim = 2;
  r.key_count = 2;
  r.weights = {1, 0, 0, 1};
  r.bias = {0, 0};
  Matrix doc(3, 2);
  doc.data = {1, 0, 2, 0, -1, -1};
  const auto b = posting_balance(r, std::vector<Matrix>{doc}, 5);
  CHECK(b.entries == 2);
  CHECK(b.max_posting == 2);
  CHECK(b.ratio == 2.0);
  CHECK(b.tokens == 3);
  CHECK(b.deactivated_tokens == 1);
}

TEST_CASE("toy_train: zero steps leaves the initialization unchanged") {
  auto config = quick_toy(3);
  config.steps = 0;
  const auto result = toy_train(config);
  CHECK(result.router.weights == result.initial.weights);
  CHECK(result.router.bias == result.initial.bias);
  CHECK(result.initial.weights == toy_initial_router(config).weights);
  CHECK(result.trace.size() == 1);
}

TEST_CASE("toy_train: loss falls over the first steps with a small learning rate") {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto config = quick_toy(seed);
    config.learning_rate = 0.001;
    const auto result = toy_train(config);
    REQUIRE(result.trace.size() == 11);
    CHECK(result.trace.back().loss.total < result.trace.front().loss.total);
    for (std::size_t i = 1; i < result.trace.size(); ++i)
      CHECK(result.trace[i].loss.total <= result.trace[i - 1].loss.total + 1e-3);
    CHECK(result.trace[3].step == 3);
  }
}

TEST_CASE("toy_train is deterministic") {
  const auto a = toy_train(quick_toy(5));
  const auto b = toy_train(quick_toy(5));
  CHECK(a.router.weights == b.router.weights);
  CHECK(a.trace.back().loss.total == b.trace.back().loss.total);
}

TEST_CASE("toy_train reports divergence with the step index") {
  auto config = quick_toy(1);
  config.learning_rate = 1e308;
  try {
    toy_train(config);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumeric);
    CHECK(std::string(e.what()).find("at step 1") != std::string::npos);
  }
}

TEST_CASE("write_trace_jsonl writes one line per step") {
  fixtures::TempDir dir;
  const auto result = toy_train(quick_toy(2));
  write_trace_jsonl(result.trace, dir / "trace.jsonl");
  std::ifstream in(dir / "trace.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    CHECK(line.find("\"balance_ratio\"") != std::string::npos);
    ++lines;
  }
  CHECK(lines == result.trace.size());
}
