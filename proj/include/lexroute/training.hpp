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

// Training objectives of the routed retriever, in fp64, with analytic
// gradients:
//
//   contrastive   -log softmax of the positive score among pos + negatives
//   router        the same form over max-pooled router representations
//   balance       sum_k f_k * p_k over softmax(W^T v + b) of every token
//   sparsity      l1 norm of the router representations, per sequence
//
//   total = contrastive + router + alpha * balance + beta * sparsity
//
// Balance and sparsity are evaluated separately on the query side and the
// document side of a batch and summed. Max operations (MaxSim, pooling,
// argmax, top-k selection) take the subgradient at the first maximizer.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lexroute/router.hpp"
#include "lexroute/synthetic.hpp"

namespace lexroute {

/// Dense row-major fp64 matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

/// Token matrices (tokens x dim) of B queries, their positives, and a list of
/// negatives per query.
struct TrainingBatch {
  std::vector<Matrix> queries;
  std::vector<Matrix> positives;
  std::vector<std::vector<Matrix>> negatives;

  std::size_t dim() const;
  void validate() const;
};

/// fp64 twin of RouterParams; weights are (dim x key_count) row-major.
struct LinearRouter {
  std::size_t dim = 0;
  std::size_t key_count = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  static LinearRouter random(std::size_t dim, std::size_t key_count,
                             std::uint64_t seed, double stddev, double bias);
  static LinearRouter from_params(const RouterParams& params);
  RouterParams to_params() const;

  /// tokens x key_count pre-activations W^T v + b.
  Matrix logits(const Matrix& tokens) const;
};

/// log(1 + relu(x)) elementwise.
Matrix router_activation(const Matrix& logits);

struct LossWeights {
  double alpha = 1e-2;
  double beta = 1e-5;
};

struct RoutingLimits {
  std::size_t query_keys = 1;
  std::size_t doc_keys = 5;
};

/// -log(e^pos / (e^pos + sum e^neg)), evaluated with log-sum-exp. Optional
/// gradient outputs; `d_negatives` must match `negatives` in size when given.
double contrastive_loss(double positive, std::span<const double> negatives,
                        double* d_positive = nullptr,
                        std::span<double> d_negatives = {});

struct PooledGradients {
  std::vector<double> query;
  std::vector<double> positive;
  std::vector<std::vector<double>> negatives;
};

/// Contrastive loss over dot products of pooled router representations.
double router_contrastive_loss(std::span<const double> query,
                               std::span<const double> positive,
                               std::span<const std::vector<double>> negatives,
                               PooledGradients* grad = nullptr);

/// Per-key max over the rows of `representation`; `argmax` receives the first
/// maximizing row of each key when non-null.
std::vector<double> max_pool(const Matrix& representation,
                             std::vector<std::size_t>* argmax = nullptr);

/// (1/B) * sum of every entry over B representation matrices.
double l1_loss(std::span<const Matrix> representations,
               std::vector<Matrix>* grad = nullptr);

/// sum_k f_k p_k with p_k = (1/B) sum softmax(logits)_k and
/// f_k = (1/B) * #tokens whose argmax is k (ties to the lowest k).
/// The gradient treats f as constant.
double load_balance_loss(std::span<const Matrix> logits,
                         std::vector<Matrix>* grad = nullptr);

/// Routed MaxSim between token matrices under `router`, with the top
/// `limits.query_keys` / `limits.doc_keys` positive keys per token.
double routed_score(const Matrix& query, const Matrix& doc,
                    const LinearRouter& router, const RoutingLimits& limits);

struct LossBreakdown {
  double total = 0.0;
  double contrastive = 0.0;
  double router = 0.0;
  double balance = 0.0;   // before alpha
  double sparsity = 0.0;  // before beta
};

struct LossGradients {
  std::vector<Matrix> queries;
  std::vector<Matrix> positives;
  std::vector<std::vector<Matrix>> negatives;
  std::vector<double> weights;
  std::vector<double> bias;
};

/// Batch-mean contrastive and router losses plus weighted regularizers, with
/// gradients for every token vector and for the router when `grad` is given.
LossBreakdown total_loss(const TrainingBatch& batch, const LinearRouter& router,
                         const LossWeights& weights,
                         const RoutingLimits& limits,
                         LossGradients* grad = nullptr);

/// Smallest distance from the current point to a non-smooth boundary of
/// total_loss: a logit at zero, a top-k selection tie, a MaxSim or pooling
/// tie, or an argmax tie. Finite-difference checks need this well above the
/// step size.
double kink_margin(const TrainingBatch& batch, const LinearRouter& router,
                   const RoutingLimits& limits);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t parameters = 0;
  double kink_margin = 0.0;
};

/// Central-difference check of the router gradients of total_loss. Relative
/// error is |a - n| / max(|a|, |n|, floor).
GradientCheckReport check_router_gradients(const TrainingBatch& batch,
                                           const LinearRouter& router,
                                           const LossWeights& weights,
                                           const RoutingLimits& limits,
                                           double step = 1e-5,
                                           double floor = 1e-5);

struct PostingBalance {
  std::uint64_t entries = 0;
  std::uint64_t max_posting = 0;
  /// max_posting / (entries / key_count); 0 when there are no entries.
  double ratio = 0.0;
  /// Tokens with every router weight at zero.
  std::uint64_t deactivated_tokens = 0;
  std::uint64_t tokens = 0;
};

PostingBalance posting_balance(const LinearRouter& router,
                               std::span<const Matrix> docs,
                               std::size_t doc_keys);

struct ToyTrainConfig {
  SyntheticConfig corpus{.docs = 48,
                         .tokens_per_doc = 8,
                         .dim = 8,
                         .vocab = 64,
                         .cluster_count = 8,
                         .skew = 1.1,
                         .queries = 24,
                         .query_tokens = 4,
                         .with_cls = false,
                         .noise = 0.3,
                         .seed = 7};
  std::size_t key_count = 16;
  std::size_t negatives = 3;
  std::size_t steps = 200;
  double learning_rate = 0.05;
  LossWeights weights;
  RoutingLimits limits;
  double init_stddev = 0.5;
  double init_bias = -2.0;
  /// Seeds the corpus, the router initialization, and negative sampling.
  std::uint64_t seed = 1;
};

struct ToyTrainStep {
  std::size_t step = 0;
  LossBreakdown loss;
  PostingBalance balance;
};

struct ToyTrainResult {
  LinearRouter initial;
  LinearRouter router;
  /// Entry i describes the router before update i; the final entry
  /// describes the returned router.
  std::vector<ToyTrainStep> trace;
};

/// Full-batch gradient descent on the router only (token vectors frozen).
/// Throws ErrorCode::kNumeric naming the step if the loss becomes NaN.
ToyTrainResult toy_train(const ToyTrainConfig& config);

/// Synthetic corpus and batch used by toy_train for `config`.
struct ToyProblem {
  SyntheticData data;
  TrainingBatch batch;
  std::vector<Matrix> doc_tokens;
};
ToyProblem make_toy_problem(const ToyTrainConfig& config);

/// Router toy_train starts from for `config`.
LinearRouter toy_initial_router(const ToyTrainConfig& config);

Matrix to_matrix(const EncodedSequence& sequence);

/// One JSON object per step.
void write_trace_jsonl(std::span<const ToyTrainStep> trace,
                       const std::filesystem::path& path);

}  // namespace lexroute
