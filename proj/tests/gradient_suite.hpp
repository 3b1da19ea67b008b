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

// Finite-difference checks of every training objective on seeded random
// configurations (B <= 4, T <= 6, |V| <= 10, c <= 8).

#pragma once

#include <random>

#include "oracles.hpp"

namespace gradcheck {

constexpr double kStep = 1e-5;
constexpr double kFloor = 1e-5;
constexpr double kMinKinkMargin = 1e-3;

struct Config {
  lexroute::TrainingBatch batch;
  lexroute::LinearRouter router;
  lexroute::LossWeights weights;
  lexroute::RoutingLimits limits;
  std::uint64_t attempts = 0;
};

/// Draws configurations from `seed` until one sits at least kMinKinkMargin
/// away from every non-smooth point.
inline Config random_config(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_b(1, 4), pick_t(1, 6), pick_v(2, 10),
      pick_c(1, 8), pick_neg(1, 3), pick_k(1, 3);
  for (Config cfg;; ) {
    ++cfg.attempts;
    const std::size_t B = pick_b(rng), V = pick_v(rng), c = pick_c(rng), negs = pick_neg(rng);
    cfg.batch = {};
    for (std::size_t b = 0; b < B; ++b) {
      cfg.batch.queries.push_back(oracle::random_matrix(rng, pick_t(rng), c));
      cfg.batch.positives.push_back(oracle::random_matrix(rng, pick_t(rng), c));
      auto& list = cfg.batch.negatives.emplace_back();
      for (std::size_t n = 0; n < negs; ++n) list.push_back(oracle::random_matrix(rng, pick_t(rng), c));
    }
    cfg.router = lexroute::LinearRouter::random(c, V, rng(), 0.7, 0.2);
    cfg.limits = {pick_k(rng), pick_k(rng) + 1};
    cfg.weights = {std::uniform_real_distribution<double>(0.1, 1.0)(rng),
                   std::uniform_real_distribution<double>(0.1, 1.0)(rng)};
    if (lexroute::kink_margin(cfg.batch, cfg.router, cfg.limits) >= kMinKinkMargin) return cfg;
  }
}

/// Composite loss: every router parameter and every token entry.
inline oracle::GradientCheck check_total(Config cfg) {
  lexroute::LossGradients g;
  lexroute::total_loss(cfg.batch, cfg.router, cfg.weights, cfg.limits, &g);
  const auto f = [&] { return lexroute::total_loss(cfg.batch, cfg.router, cfg.weights, cfg.limits).total; };
  oracle::GradientCheck check;
  for (std::size_t i = 0; i < cfg.router.weights.size(); ++i)
    check.add(g.weights[i], oracle::central_difference(f, cfg.router.weights[i], kStep), kFloor);
  for (std::size_t i = 0; i < cfg.router.bias.size(); ++i)
    check.add(g.bias[i], oracle::central_difference(f, cfg.router.bias[i], kStep), kFloor);
  auto visit = [&](lexroute::Matrix& m, const lexroute::Matrix& gm) {
    for (std::size_t i = 0; i < m.data.size(); ++i)
      check.add(gm.data[i], oracle::central_difference(f, m.data[i], kStep), kFloor);
  };
  for (std::size_t b = 0; b < cfg.batch.queries.size(); ++b) {
    visit(cfg.batch.queries[b], g.queries[b]);
    visit(cfg.batch.positives[b], g.positives[b]);
    for (std::size_t n = 0; n < cfg.batch.negatives[b].size(); ++n)
      visit(cfg.batch.negatives[b][n], g.negatives[b][n]);
  }
  return check;
}

/// Contrastive loss with respect to the scores.
inline oracle::GradientCheck check_contrastive(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 2.0);
  std::vector<double> s(1 + std::uniform_int_distribution<int>(1, 5)(rng));
  for (auto& x : s) x = n(rng);
  std::vector<double> d_neg(s.size() - 1);
  double d_pos = 0.0;
  lexroute::contrastive_loss(s[0], {s.data() + 1, s.size() - 1}, &d_pos, d_neg);
  const auto f = [&] { return lexroute::contrastive_loss(s[0], {s.data() + 1, s.size() - 1}); };
  oracle::GradientCheck check;
  check.add(d_pos, oracle::central_difference(f, s[0], kStep), kFloor);
  for (std::size_t i = 0; i < d_neg.size(); ++i)
    check.add(d_neg[i], oracle::central_difference(f, s[i + 1], kStep), kFloor);
  return check;
}

/// Router contrastive loss with respect to the pooled representations.
inline oracle::GradientCheck check_router_contrastive(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  const std::size_t V = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
  const std::size_t negs = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
  std::vector<double> q(V), p(V);
  std::vector<std::vector<double>> ns(negs, std::vector<double>(V));
  for (auto& x : q) x = u(rng);
  for (auto& x : p) x = u(rng);
  for (auto& v : ns)
    for (auto& x : v) x = u(rng);
  lexroute::PooledGradients g;
  lexroute::router_contrastive_loss(q, p, ns, &g);
  const auto f = [&] { return lexroute::router_contrastive_loss(q, p, ns); };
  oracle::GradientCheck check;
  for (std::size_t k = 0; k < V; ++k) {
    check.add(g.query[k], oracle::central_difference(f, q[k], kStep), kFloor);
    check.add(g.positive[k], oracle::central_difference(f, p[k], kStep), kFloor);
    for (std::size_t n = 0; n < negs; ++n)
      check.add(g.negatives[n][k], oracle::central_difference(f, ns[n][k], kStep), kFloor);
  }
  return check;
}

inline double min_argmax_gap(const std::vector<lexroute::Matrix>& logits) {
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& m : logits)
    for (std::size_t t = 0; t < m.rows; ++t) {
      std::vector<double> row(m.row(t).begin(), m.row(t).end());
      std::sort(row.begin(), row.end(), std::greater<>());
      gap = std::min(gap, row[0] - row[1]);
    }
  return gap;
}

/// l1 and balance losses with respect to representations and logits.
inline oracle::GradientCheck check_regularizers(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t B = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
  const std::size_t V = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
  std::vector<lexroute::Matrix> z;
  while (true) {
    z.clear();
    for (std::size_t b = 0; b < B; ++b)
      z.push_back(oracle::random_matrix(rng, std::uniform_int_distribution<std::size_t>(1, 6)(rng), V));
    if (min_argmax_gap(z) >= kMinKinkMargin) break;
  }
  oracle::GradientCheck check;
  std::vector<lexroute::Matrix> gz;
  lexroute::load_balance_loss(z, &gz);
  const auto fb = [&] { return lexroute::load_balance_loss(z); };
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t i = 0; i < z[b].data.size(); ++i)
      check.add(gz[b].data[i], oracle::central_difference(fb, z[b].data[i], kStep), kFloor);

  std::vector<lexroute::Matrix> phi;
  for (auto& m : z) phi.push_back(lexroute::router_activation(m));
  std::vector<lexroute::Matrix> gphi;
  lexroute::l1_loss(phi, &gphi);
  const auto fs = [&] { return lexroute::l1_loss(phi); };
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t i = 0; i < phi[b].data.size(); ++i)
      if (phi[b].data[i] > kMinKinkMargin)
        check.add(gphi[b].data[i], oracle::central_difference(fs, phi[b].data[i], kStep), kFloor);
  return check;
}

}  // namespace gradcheck
