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

#include "lexroute/training.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "binary_io.hpp"
#include "lexroute/common.hpp"

namespace lexroute {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct KeyWeight {
  std::size_t key;
  double weight;
};

// Top `n` strictly positive entries of `row`, descending, ties by key.
std::vector<KeyWeight> top_positive(std::span<const double> row, std::size_t n) {
  std::vector<KeyWeight> out;
  for (std::size_t k = 0; k < row.size(); ++k)
    if (row[k] > 0.0) out.push_back({k, row[k]});
  std::sort(out.begin(), out.end(), [](const KeyWeight& a, const KeyWeight& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.key < b.key;
  });
  if (out.size() > n) out.resize(n);
  return out;
}

double dot64(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Forward state of one sequence plus its gradient accumulators.
struct SequenceState {
  const Matrix* tokens = nullptr;
  Matrix logits;
  Matrix phi;
  std::vector<std::vector<KeyWeight>> routes;
  Matrix d_phi;
  Matrix d_logits;  // contributions that bypass the activation (balance loss)
  Matrix d_tokens;

  SequenceState(const Matrix& x, const LinearRouter& router, std::size_t max_keys)
      : tokens(&x), logits(router.logits(x)), phi(router_activation(logits)) {
    routes.reserve(x.rows);
    for (std::size_t t = 0; t < x.rows; ++t) routes.push_back(top_positive(phi.row(t), max_keys));
    d_phi = Matrix(phi.rows, phi.cols);
    d_logits = Matrix(phi.rows, phi.cols);
    d_tokens = Matrix(x.rows, x.cols);
  }
};

// One winning interaction of the routed MaxSim.
struct Interaction {
  std::size_t q_token, d_token, key;
  double q_weight, d_weight, token_dot;
};

// Routed MaxSim between two sequence states. `second_gap`, when given,
// receives the smallest best-minus-runner-up gap over all query routes.
double routed_maxsim(const SequenceState& q, const SequenceState& d,
                     std::vector<Interaction>* winners, double* second_gap) {
  double total = 0.0;
  for (std::size_t i = 0; i < q.routes.size(); ++i) {
    const auto vq = q.tokens->row(i);
    for (const auto& qr : q.routes[i]) {
      double best = -kInf, runner_up = -kInf;
      Interaction win{};
      for (std::size_t j = 0; j < d.routes.size(); ++j) {
        for (const auto& dr : d.routes[j]) {
          if (dr.key != qr.key) continue;
          const double td = dot64(vq, d.tokens->row(j));
          const double value = qr.weight * dr.weight * td;
          if (value > best) {
            runner_up = best;
            best = value;
            win = {i, j, qr.key, qr.weight, dr.weight, td};
          } else {
            runner_up = std::max(runner_up, value);
          }
        }
      }
      if (best == -kInf) continue;
      total += best;
      if (winners) winners->push_back(win);
      if (second_gap && runner_up > -kInf) *second_gap = std::min(*second_gap, best - runner_up);
    }
  }
  return total;
}

void backprop_maxsim(const std::vector<Interaction>& winners, double ds,
                     SequenceState& q, SequenceState& d) {
  for (const auto& w : winners) {
    q.d_phi.at(w.q_token, w.key) += ds * w.d_weight * w.token_dot;
    d.d_phi.at(w.d_token, w.key) += ds * w.q_weight * w.token_dot;
    const double scale = ds * w.q_weight * w.d_weight;
    const auto vq = q.tokens->row(w.q_token);
    const auto vd = d.tokens->row(w.d_token);
    auto gq = q.d_tokens.row(w.q_token);
    auto gd = d.d_tokens.row(w.d_token);
    for (std::size_t c = 0; c < vq.size(); ++c) {
      gq[c] += scale * vd[c];
      gd[c] += scale * vq[c];
    }
  }
}

// Chains d_phi and d_logits through the router into token and router
// gradients.
void backprop_router(SequenceState& s, const LinearRouter& router,
                     LossGradients& grad, Matrix& d_tokens_out) {
  const Matrix& x = *s.tokens;
  const std::size_t keys = router.key_count;
  for (std::size_t t = 0; t < x.rows; ++t) {
    std::vector<double> dz(keys);
    for (std::size_t k = 0; k < keys; ++k) {
      const double z = s.logits.at(t, k);
      dz[k] = (z > 0.0 ? s.d_phi.at(t, k) / (1.0 + z) : 0.0) + s.d_logits.at(t, k);
    }
    const auto xt = x.row(t);
    auto gx = s.d_tokens.row(t);
    for (std::size_t c = 0; c < x.cols; ++c) {
      const double* wrow = router.weights.data() + c * keys;
      double* gw = grad.weights.data() + c * keys;
      double acc = 0.0;
      for (std::size_t k = 0; k < keys; ++k) {
        gw[k] += xt[c] * dz[k];
        acc += dz[k] * wrow[k];
      }
      gx[c] += acc;
    }
    for (std::size_t k = 0; k < keys; ++k) grad.bias[k] += dz[k];
  }
  d_tokens_out = s.d_tokens;
}

}  // namespace

std::size_t TrainingBatch::dim() const {
  return queries.empty() ? 0 : queries.front().cols;
}

void TrainingBatch::validate() const {
  require(!queries.empty(), ErrorCode::kInvalidArgument, "batch: B must be >= 1");
  require(positives.size() == queries.size() && negatives.size() == queries.size(),
          ErrorCode::kDimensionMismatch, "batch: queries, positives and negatives disagree");
  const std::size_t c = dim();
  const auto check = [c](const Matrix& m) {
    require(m.cols == c && m.data.size() == m.rows * m.cols, ErrorCode::kDimensionMismatch,
            "batch: inconsistent token dimension");
  };
  for (const auto& m : queries) check(m);
  for (const auto& m : positives) check(m);
  for (const auto& list : negatives)
    for (const auto& m : list) check(m);
}

LinearRouter LinearRouter::random(std::size_t dim, std::size_t key_count,
                                  std::uint64_t seed, double stddev, double bias) {
  require(dim >= 1 && key_count >= 1, ErrorCode::kInvalidArgument,
          "router: dim and key_count must be >= 1");
  LinearRouter r;
  r.dim = dim;
  r.key_count = key_count;
  r.weights.resize(dim * key_count);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  for (auto& w : r.weights) w = normal(rng);
  r.bias.assign(key_count, bias);
  return r;
}

LinearRouter LinearRouter::from_params(const RouterParams& params) {
  params.validate();
  LinearRouter r;
  r.dim = params.dim;
  r.key_count = params.key_count;
  r.weights.assign(params.weights.begin(), params.weights.end());
  r.bias.assign(params.bias.begin(), params.bias.end());
  return r;
}

RouterParams LinearRouter::to_params() const {
  RouterParams p;
  p.dim = static_cast<std::uint32_t>(dim);
  p.key_count = static_cast<std::uint32_t>(key_count);
  p.weights.assign(weights.begin(), weights.end());
  p.bias.assign(bias.begin(), bias.end());
  p.validate();
  return p;
}

Matrix LinearRouter::logits(const Matrix& tokens) const {
  require(tokens.cols == dim, ErrorCode::kDimensionMismatch,
          "router: token dimension does not match");
  Matrix z(tokens.rows, key_count);
  for (std::size_t t = 0; t < tokens.rows; ++t) {
    auto out = z.row(t);
    std::copy(bias.begin(), bias.end(), out.begin());
    for (std::size_t c = 0; c < dim; ++c) {
      const double x = tokens.at(t, c);
      const double* wrow = weights.data() + c * key_count;
      for (std::size_t k = 0; k < key_count; ++k) out[k] += x * wrow[k];
    }
  }
  return z;
}

Matrix router_activation(const Matrix& logits) {
  Matrix phi(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.data.size(); ++i)
    phi.data[i] = std::log1p(std::max(0.0, logits.data[i]));
  return phi;
}

double contrastive_loss(double positive, std::span<const double> negatives,
                        double* d_positive, std::span<double> d_negatives) {
  double m = positive;
  for (double s : negatives) m = std::max(m, s);
  double sum = std::exp(positive - m);
  for (double s : negatives) sum += std::exp(s - m);
  const double lse = m + std::log(sum);
  if (d_positive) *d_positive = std::exp(positive - lse) - 1.0;
  if (!d_negatives.empty()) {
    require(d_negatives.size() == negatives.size(), ErrorCode::kDimensionMismatch,
            "contrastive_loss: gradient buffer size mismatch");
    for (std::size_t n = 0; n < negatives.size(); ++n) d_negatives[n] = std::exp(negatives[n] - lse);
  }
  return lse - positive;
}

double router_contrastive_loss(std::span<const double> query,
                               std::span<const double> positive,
                               std::span<const std::vector<double>> negatives,
                               PooledGradients* grad) {
  require(query.size() == positive.size(), ErrorCode::kDimensionMismatch,
          "router_contrastive_loss: length mismatch");
  for (const auto& n : negatives)
    require(n.size() == query.size(), ErrorCode::kDimensionMismatch,
            "router_contrastive_loss: length mismatch");
  const double s_pos = dot64(query, positive);
  std::vector<double> s_neg(negatives.size());
  for (std::size_t n = 0; n < negatives.size(); ++n) s_neg[n] = dot64(query, negatives[n]);
  double d_pos = 0.0;
  std::vector<double> d_neg(negatives.size());
  const double loss = contrastive_loss(s_pos, s_neg, &d_pos, d_neg);
  if (grad) {
    grad->query.assign(query.size(), 0.0);
    grad->positive.resize(query.size());
    grad->negatives.assign(negatives.size(), std::vector<double>(query.size()));
    for (std::size_t k = 0; k < query.size(); ++k) {
      grad->query[k] = d_pos * positive[k];
      grad->positive[k] = d_pos * query[k];
    }
    for (std::size_t n = 0; n < negatives.size(); ++n)
      for (std::size_t k = 0; k < query.size(); ++k) {
        grad->query[k] += d_neg[n] * negatives[n][k];
        grad->negatives[n][k] = d_neg[n] * query[k];
      }
  }
  return loss;
}

std::vector<double> max_pool(const Matrix& representation,
                             std::vector<std::size_t>* argmax) {
  require(representation.rows >= 1, ErrorCode::kInvalidArgument, "max_pool: empty sequence");
  std::vector<double> pooled(representation.row(0).begin(), representation.row(0).end());
  if (argmax) argmax->assign(representation.cols, 0);
  for (std::size_t t = 1; t < representation.rows; ++t)
    for (std::size_t k = 0; k < representation.cols; ++k)
      if (representation.at(t, k) > pooled[k]) {
        pooled[k] = representation.at(t, k);
        if (argmax) (*argmax)[k] = t;
      }
  return pooled;
}

double l1_loss(std::span<const Matrix> representations, std::vector<Matrix>* grad) {
  if (representations.empty()) return 0.0;
  const double inv_b = 1.0 / static_cast<double>(representations.size());
  double sum = 0.0;
  for (const auto& m : representations) sum += std::accumulate(m.data.begin(), m.data.end(), 0.0);
  if (grad) {
    grad->clear();
    for (const auto& m : representations) {
      Matrix g(m.rows, m.cols);
      std::fill(g.data.begin(), g.data.end(), inv_b);
      grad->push_back(std::move(g));
    }
  }
  return sum * inv_b;
}

double load_balance_loss(std::span<const Matrix> logits, std::vector<Matrix>* grad) {
  if (logits.empty()) return 0.0;
  const std::size_t keys = logits.front().cols;
  for (const auto& m : logits)
    require(m.cols == keys, ErrorCode::kDimensionMismatch, "load_balance_loss: key counts differ");
  const double inv_b = 1.0 / static_cast<double>(logits.size());
  std::vector<double> p(keys, 0.0), f(keys, 0.0);
  std::vector<Matrix> soft;
  soft.reserve(logits.size());
  for (const auto& z : logits) {
    Matrix s(z.rows, keys);
    for (std::size_t t = 0; t < z.rows; ++t) {
      const auto row = z.row(t);
      std::size_t arg = 0;
      for (std::size_t k = 1; k < keys; ++k)
        if (row[k] > row[arg]) arg = k;
      double sum = 0.0;
      for (std::size_t k = 0; k < keys; ++k) sum += (s.at(t, k) = std::exp(row[k] - row[arg]));
      for (std::size_t k = 0; k < keys; ++k) {
        s.at(t, k) /= sum;
        p[k] += inv_b * s.at(t, k);
      }
      f[arg] += inv_b;
    }
    soft.push_back(std::move(s));
  }
  const double loss = dot64(f, p);
  if (grad) {
    grad->clear();
    for (const auto& s : soft) {
      Matrix g(s.rows, keys);
      for (std::size_t t = 0; t < s.rows; ++t) {
        const double fs = dot64(f, s.row(t));
        for (std::size_t m = 0; m < keys; ++m) g.at(t, m) = inv_b * s.at(t, m) * (f[m] - fs);
      }
      grad->push_back(std::move(g));
    }
  }
  return loss;
}

double routed_score(const Matrix& query, const Matrix& doc,
                    const LinearRouter& router, const RoutingLimits& limits) {
  const SequenceState q(query, router, limits.query_keys);
  const SequenceState d(doc, router, limits.doc_keys);
  return routed_maxsim(q, d, nullptr, nullptr);
}

LossBreakdown total_loss(const TrainingBatch& batch, const LinearRouter& router,
                         const LossWeights& weights, const RoutingLimits& limits,
                         LossGradients* grad) {
  batch.validate();
  require(batch.dim() == router.dim, ErrorCode::kDimensionMismatch,
          "total_loss: batch and router dimensions differ");
  require(weights.alpha >= 0.0 && weights.beta >= 0.0, ErrorCode::kInvalidArgument,
          "total_loss: alpha and beta must be >= 0");
  const std::size_t B = batch.queries.size();
  const double inv_b = 1.0 / static_cast<double>(B);

  std::vector<SequenceState> qs, ps;
  std::vector<std::vector<SequenceState>> ns(B);
  qs.reserve(B);
  ps.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    qs.emplace_back(batch.queries[b], router, limits.query_keys);
    ps.emplace_back(batch.positives[b], router, limits.doc_keys);
    ns[b].reserve(batch.negatives[b].size());
    for (const auto& m : batch.negatives[b]) ns[b].emplace_back(m, router, limits.doc_keys);
  }

  LossBreakdown loss;
  for (std::size_t b = 0; b < B; ++b) {
    // Contrastive loss over routed MaxSim scores.
    std::vector<Interaction> pos_win;
    const double s_pos = routed_maxsim(qs[b], ps[b], &pos_win, nullptr);
    std::vector<std::vector<Interaction>> neg_win(ns[b].size());
    std::vector<double> s_neg(ns[b].size());
    for (std::size_t n = 0; n < ns[b].size(); ++n) s_neg[n] = routed_maxsim(qs[b], ns[b][n], &neg_win[n], nullptr);
    double d_pos = 0.0;
    std::vector<double> d_neg(s_neg.size());
    loss.contrastive += inv_b * contrastive_loss(s_pos, s_neg, &d_pos, d_neg);
    if (grad) {
      backprop_maxsim(pos_win, inv_b * d_pos, qs[b], ps[b]);
      for (std::size_t n = 0; n < ns[b].size(); ++n) backprop_maxsim(neg_win[n], inv_b * d_neg[n], qs[b], ns[b][n]);
    }

    // Router loss over max-pooled representations.
    std::vector<std::size_t> q_arg, p_arg;
    const auto pool_q = max_pool(qs[b].phi, &q_arg);
    const auto pool_p = max_pool(ps[b].phi, &p_arg);
    std::vector<std::vector<double>> pool_n;
    std::vector<std::vector<std::size_t>> n_arg(ns[b].size());
    for (std::size_t n = 0; n < ns[b].size(); ++n) pool_n.push_back(max_pool(ns[b][n].phi, &n_arg[n]));
    PooledGradients pg;
    loss.router += inv_b * router_contrastive_loss(pool_q, pool_p, pool_n, grad ? &pg : nullptr);
    if (grad) {
      for (std::size_t k = 0; k < router.key_count; ++k) {
        qs[b].d_phi.at(q_arg[k], k) += inv_b * pg.query[k];
        ps[b].d_phi.at(p_arg[k], k) += inv_b * pg.positive[k];
        for (std::size_t n = 0; n < ns[b].size(); ++n) ns[b][n].d_phi.at(n_arg[n][k], k) += inv_b * pg.negatives[n][k];
      }
    }
  }

  // Regularizers, separately on the query side and the document side.
  std::vector<SequenceState*> q_side, d_side;
  for (auto& s : qs) q_side.push_back(&s);
  for (std::size_t b = 0; b < B; ++b) {
    d_side.push_back(&ps[b]);
    for (auto& s : ns[b]) d_side.push_back(&s);
  }
  for (auto* side : {&q_side, &d_side}) {
    std::vector<Matrix> z, phi;
    for (auto* s : *side) {
      z.push_back(s->logits);
      phi.push_back(s->phi);
    }
    std::vector<Matrix> gz, gphi;
    loss.balance += load_balance_loss(z, grad ? &gz : nullptr);
    loss.sparsity += l1_loss(phi, grad ? &gphi : nullptr);
    if (grad) {
      for (std::size_t i = 0; i < side->size(); ++i) {
        auto* s = (*side)[i];
        for (std::size_t e = 0; e < s->d_logits.data.size(); ++e) {
          s->d_logits.data[e] += weights.alpha * gz[i].data[e];
          s->d_phi.data[e] += weights.beta * gphi[i].data[e];
        }
      }
    }
  }
  loss.total = loss.contrastive + loss.router + weights.alpha * loss.balance + weights.beta * loss.sparsity;

  if (grad) {
    grad->weights.assign(router.weights.size(), 0.0);
    grad->bias.assign(router.key_count, 0.0);
    grad->queries.resize(B);
    grad->positives.resize(B);
    grad->negatives.resize(B);
    for (std::size_t b = 0; b < B; ++b) {
      backprop_router(qs[b], router, *grad, grad->queries[b]);
      backprop_router(ps[b], router, *grad, grad->positives[b]);
      grad->negatives[b].resize(ns[b].size());
      for (std::size_t n = 0; n < ns[b].size(); ++n) backprop_router(ns[b][n], router, *grad, grad->negatives[b][n]);
    }
  }
  return loss;
}

double kink_margin(const TrainingBatch& batch, const LinearRouter& router,
                   const RoutingLimits& limits) {
  batch.validate();
  double margin = kInf;
  auto scan_sequence = [&](const SequenceState& s, std::size_t max_keys) {
    for (std::size_t t = 0; t < s.logits.rows; ++t) {
      const auto z = s.logits.row(t);
      std::vector<double> sorted(z.begin(), z.end());
      std::sort(sorted.rbegin(), sorted.rend());
      for (double v : z) margin = std::min(margin, std::abs(v));     // relu
      if (sorted.size() > 1) margin = std::min(margin, sorted[0] - sorted[1]);  // argmax
      const auto phi = s.phi.row(t);
      std::vector<double> act(phi.begin(), phi.end());
      std::sort(act.rbegin(), act.rend());
      if (act.size() > max_keys && act[max_keys] > 0.0)               // top-k set
        margin = std::min(margin, act[max_keys - 1] - act[max_keys]);
    }
    for (std::size_t k = 0; k < s.phi.cols; ++k) {                    // pooling
      double first = -kInf, second = -kInf;
      for (std::size_t t = 0; t < s.phi.rows; ++t) {
        const double v = s.phi.at(t, k);
        if (v > first) {
          second = first;
          first = v;
        } else {
          second = std::max(second, v);
        }
      }
      if (first > 0.0 && second > -kInf) margin = std::min(margin, first - second);
    }
  };
  for (std::size_t b = 0; b < batch.queries.size(); ++b) {
    const SequenceState q(batch.queries[b], router, limits.query_keys);
    scan_sequence(q, limits.query_keys);
    std::vector<const Matrix*> docs{&batch.positives[b]};
    for (const auto& m : batch.negatives[b]) docs.push_back(&m);
    for (const auto* m : docs) {
      const SequenceState d(*m, router, limits.doc_keys);
      scan_sequence(d, limits.doc_keys);
      routed_maxsim(q, d, nullptr, &margin);                          // MaxSim
    }
  }
  return margin;
}

GradientCheckReport check_router_gradients(const TrainingBatch& batch,
                                           const LinearRouter& router,
                                           const LossWeights& weights,
                                           const RoutingLimits& limits,
                                           double step, double floor) {
  require(step > 0.0 && floor > 0.0, ErrorCode::kInvalidArgument,
          "check_router_gradients: step and floor must be positive");
  GradientCheckReport report;
  report.kink_margin = kink_margin(batch, router, limits);
  LossGradients grad;
  total_loss(batch, router, weights, limits, &grad);
  LinearRouter probe = router;
  const auto numeric = [&](double& x) {
    const double saved = x;
    x = saved + step;
    const double up = total_loss(batch, probe, weights, limits).total;
    x = saved - step;
    const double down = total_loss(batch, probe, weights, limits).total;
    x = saved;
    return (up - down) / (2.0 * step);
  };
  const auto record = [&](double analytic, double n) {
    const double denom = std::max({std::abs(analytic), std::abs(n), floor});
    report.max_relative_error = std::max(report.max_relative_error, std::abs(analytic - n) / denom);
    ++report.parameters;
  };
  for (std::size_t i = 0; i < probe.weights.size(); ++i) record(grad.weights[i], numeric(probe.weights[i]));
  for (std::size_t k = 0; k < probe.bias.size(); ++k) record(grad.bias[k], numeric(probe.bias[k]));
  return report;
}

PostingBalance posting_balance(const LinearRouter& router, std::span<const Matrix> docs,
                               std::size_t doc_keys) {
  PostingBalance out;
  std::vector<std::uint64_t> counts(router.key_count, 0);
  for (const auto& doc : docs) {
    const Matrix phi = router_activation(router.logits(doc));
    for (std::size_t t = 0; t < phi.rows; ++t) {
      ++out.tokens;
      const auto routes = top_positive(phi.row(t), doc_keys);
      if (routes.empty()) ++out.deactivated_tokens;
      for (const auto& r : routes) ++counts[r.key];
      out.entries += routes.size();
    }
  }
  out.max_posting = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  if (out.entries > 0)
    out.ratio = static_cast<double>(out.max_posting) * static_cast<double>(router.key_count) /
                static_cast<double>(out.entries);
  return out;
}

Matrix to_matrix(const EncodedSequence& sequence) {
  const std::size_t dim = sequence.tokens.empty() ? 0 : sequence.tokens.front().vector.size();
  Matrix m(sequence.tokens.size(), dim);
  for (std::size_t t = 0; t < sequence.tokens.size(); ++t) {
    require(sequence.tokens[t].vector.size() == dim, ErrorCode::kDimensionMismatch,
            "to_matrix: token dimensions differ");
    std::copy(sequence.tokens[t].vector.begin(), sequence.tokens[t].vector.end(), m.row(t).begin());
  }
  return m;
}

ToyProblem make_toy_problem(const ToyTrainConfig& config) {
  SyntheticConfig corpus = config.corpus;
  corpus.seed = config.seed;
  require(corpus.docs > config.negatives, ErrorCode::kInvalidArgument,
          "toy_train: need more documents than negatives per query");
  ToyProblem problem;
  problem.data = generate_synthetic(corpus);
  std::unordered_map<std::string, std::size_t> doc_index;
  for (std::size_t d = 0; d < problem.data.docs.size(); ++d) {
    doc_index[problem.data.docs[d].id] = d;
    problem.doc_tokens.push_back(to_matrix(problem.data.docs[d]));
  }
  std::mt19937_64 rng(config.seed ^ 0x5bd1e995ULL);
  std::uniform_int_distribution<std::size_t> pick(0, problem.data.docs.size() - 1);
  for (const auto& q : problem.data.queries) {
    const std::size_t pos = doc_index.at(problem.data.qrels.at(q.id).begin()->first);
    problem.batch.queries.push_back(to_matrix(q));
    problem.batch.positives.push_back(problem.doc_tokens[pos]);
    std::vector<std::size_t> chosen;
    while (chosen.size() < config.negatives) {
      const std::size_t n = pick(rng);
      if (n != pos && std::find(chosen.begin(), chosen.end(), n) == chosen.end()) chosen.push_back(n);
    }
    auto& negs = problem.batch.negatives.emplace_back();
    for (auto n : chosen) negs.push_back(problem.doc_tokens[n]);
  }
  return problem;
}

LinearRouter toy_initial_router(const ToyTrainConfig& config) {
  return LinearRouter::random(config.corpus.dim, config.key_count, config.seed + 0x2545f491ULL,
                              config.init_stddev, config.init_bias);
}

ToyTrainResult toy_train(const ToyTrainConfig& config) {
  require(config.learning_rate > 0.0 && std::isfinite(config.learning_rate),
          ErrorCode::kInvalidArgument, "toy_train: learning rate must be positive");
  require(config.key_count >= 1, ErrorCode::kInvalidArgument, "toy_train: key_count must be >= 1");
  const ToyProblem problem = make_toy_problem(config);
  ToyTrainResult result;
  result.initial = toy_initial_router(config);
  result.router = result.initial;
  auto& router = result.router;

  for (std::size_t step = 0; step <= config.steps; ++step) {
    const bool last = step == config.steps;
    LossGradients grad;
    const auto loss = total_loss(problem.batch, router, config.weights, config.limits, last ? nullptr : &grad);
    if (!std::isfinite(loss.total))
      fail(ErrorCode::kNumeric, "toy_train: loss diverged at step " + std::to_string(step));
    result.trace.push_back({step, loss, posting_balance(router, problem.doc_tokens, config.limits.doc_keys)});
    if (last) break;
    for (std::size_t i = 0; i < router.weights.size(); ++i) router.weights[i] -= config.learning_rate * grad.weights[i];
    for (std::size_t k = 0; k < router.key_count; ++k) router.bias[k] -= config.learning_rate * grad.bias[k];
  }
  return result;
}

void write_trace_jsonl(std::span<const ToyTrainStep> trace, const std::filesystem::path& path) {
  std::string text;
  for (const auto& s : trace) {
    nlohmann::json j{{"step", s.step},
                     {"total", s.loss.total},
                     {"contrastive", s.loss.contrastive},
                     {"router", s.loss.router},
                     {"balance", s.loss.balance},
                     {"sparsity", s.loss.sparsity},
                     {"balance_ratio", s.balance.ratio},
                     {"max_posting", s.balance.max_posting},
                     {"entries", s.balance.entries},
                     {"deactivated_tokens", s.balance.deactivated_tokens}};
    text += j.dump();
    text += '\n';
  }
  detail::atomic_write(path, {text.data(), text.size()});
}

}  // namespace lexroute
