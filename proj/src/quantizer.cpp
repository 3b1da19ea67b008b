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

#include "lexroute/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "binary_io.hpp"
#include "lexroute/common.hpp"

namespace lexroute {
namespace {

constexpr char kCodebookMagic[] = "CTPQ";

double squared_distance(const float* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return acc;
}

std::size_t distinct_rows(const std::vector<float>& sub, std::size_t rows,
                          std::size_t m) {
  std::set<std::vector<float>> seen;
  for (std::size_t r = 0; r < rows; ++r)
    seen.emplace(sub.begin() + r * m, sub.begin() + (r + 1) * m);
  return seen.size();
}

// Nearest centroid, ties to the lowest index.
std::size_t nearest(const float* x, const std::vector<double>& centroids,
                    std::size_t k, std::size_t m, double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(x, centroids.data() + c * m, m);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

struct SubspaceResult {
  std::vector<double> centroids;
  std::vector<double> mse;  // summed squared error / rows, per recorded step
};

// k-means++ seeding followed by Lloyd iterations on one subspace. `sub` holds
// rows x m values. Empty clusters keep their previous centroid.
SubspaceResult kmeans(const std::vector<float>& sub, std::size_t rows,
                      std::size_t m, std::size_t k, std::size_t iterations,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SubspaceResult out;
  out.centroids.assign(k * m, 0.0);
  std::vector<double> nearest_d(rows, std::numeric_limits<double>::infinity());

  auto set_centroid = [&](std::size_t c, std::size_t row) {
    for (std::size_t i = 0; i < m; ++i) out.centroids[c * m + i] = sub[row * m + i];
    for (std::size_t r = 0; r < rows; ++r)
      nearest_d[r] = std::min(nearest_d[r], squared_distance(&sub[r * m], &out.centroids[c * m], m));
  };

  set_centroid(0, std::uniform_int_distribution<std::size_t>(0, rows - 1)(rng));
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(nearest_d.begin(), nearest_d.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      // D^2 sampling; rows already on a centroid have zero mass.
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double cum = 0.0;
      std::size_t last_positive = 0;
      pick = rows;
      for (std::size_t r = 0; r < rows; ++r) {
        if (nearest_d[r] <= 0.0) continue;
        last_positive = r;
        cum += nearest_d[r];
        if (cum > target) {
          pick = r;
          break;
        }
      }
      if (pick == rows) pick = last_positive;
    } else {
      // Every row already coincides with a centroid; duplicate one.
      pick = std::uniform_int_distribution<std::size_t>(0, rows - 1)(rng);
    }
    set_centroid(c, pick);
  }

  std::vector<std::size_t> assign(rows, 0);
  auto assign_step = [&] {
    double err = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      double d = 0.0;
      assign[r] = nearest(&sub[r * m], out.centroids, k, m, &d);
      err += d;
    }
    out.mse.push_back(err / static_cast<double>(rows));
  };

  assign_step();
  for (std::size_t it = 0; it < iterations; ++it) {
    std::vector<double> sums(k * m, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      ++counts[assign[r]];
      for (std::size_t i = 0; i < m; ++i) sums[assign[r] * m + i] += sub[r * m + i];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t i = 0; i < m; ++i)
        out.centroids[c * m + i] = sums[c * m + i] / static_cast<double>(counts[c]);
    }
    assign_step();
  }
  return out;
}

}  // namespace

PqCodebook train_pq(std::span<const float> data, std::size_t dim,
                    const PqTrainOptions& options, PqTrainReport* report) {
  require(dim >= 1 && data.size() % dim == 0, ErrorCode::kDimensionMismatch,
          "train_pq: data is not a whole number of vectors");
  require(options.sub_dim >= 1 && dim % options.sub_dim == 0,
          ErrorCode::kInvalidArgument, "train_pq: sub_dim must divide the dimension");
  require(options.k >= 1, ErrorCode::kInvalidArgument, "train_pq: k must be >= 1");
  const std::size_t total_rows = data.size() / dim;
  require(total_rows >= 1, ErrorCode::kInvalidArgument, "train_pq: empty sample");

  // Seeded subsample without replacement when the sample is over the cap.
  std::vector<std::size_t> rows(total_rows);
  std::iota(rows.begin(), rows.end(), 0);
  if (options.max_samples > 0 && total_rows > options.max_samples) {
    std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(options.max_samples);
    std::sort(rows.begin(), rows.end());
  }
  const std::size_t n = rows.size();
  const std::size_t m = options.sub_dim;
  const std::size_t subspaces = dim / m;

  std::vector<std::vector<float>> subs(subspaces, std::vector<float>(n * m));
  for (std::size_t s = 0; s < subspaces; ++s)
    for (std::size_t r = 0; r < n; ++r)
      std::copy_n(data.data() + rows[r] * dim + s * m, m, subs[s].data() + r * m);

  std::size_t k = options.k;
  if (n < k) {
    std::size_t distinct = 1;
    for (std::size_t s = 0; s < subspaces; ++s) distinct = std::max(distinct, distinct_rows(subs[s], n, m));
    k = std::min(k, distinct);
  }

  std::vector<SubspaceResult> results(subspaces);
  {
    const std::size_t workers = std::min(subspaces, worker_count());
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < subspaces; s += workers)
          results[s] = kmeans(subs[s], n, m, k, options.iterations, options.seed + 7919 * s);
      });
    }
  }

  PqCodebook cb;
  cb.sub_dim = static_cast<std::uint32_t>(m);
  cb.k = static_cast<std::uint32_t>(k);
  cb.num_subspaces = static_cast<std::uint32_t>(subspaces);
  cb.centroids.resize(subspaces * k * m);
  for (std::size_t s = 0; s < subspaces; ++s)
    for (std::size_t i = 0; i < k * m; ++i)
      cb.centroids[s * k * m + i] = static_cast<float>(results[s].centroids[i]);

  if (report) {
    report->effective_k = cb.k;
    report->sample_count = n;
    report->mse_trace.assign(options.iterations + 1, 0.0);
    for (const auto& r : results)
      for (std::size_t t = 0; t < r.mse.size(); ++t) report->mse_trace[t] += r.mse[t];
  }
  return cb;
}

void pq_encode_into(std::span<const float> vector, const PqCodebook& codebook,
                    std::span<std::uint8_t> codes) {
  require(vector.size() == codebook.dim(), ErrorCode::kDimensionMismatch,
          "pq_encode: vector dimension does not match the codebook");
  require(codes.size() == codebook.num_subspaces && codebook.k <= 256,
          ErrorCode::kInvalidArgument, "pq_encode: code buffer mismatch");
  const auto codes32 = pq_encode(vector, codebook);
  for (std::size_t s = 0; s < codes32.size(); ++s) codes[s] = static_cast<std::uint8_t>(codes32[s]);
}

std::vector<std::uint32_t> pq_encode(std::span<const float> vector,
                                     const PqCodebook& codebook) {
  require(vector.size() == codebook.dim(), ErrorCode::kDimensionMismatch,
          "pq_encode: vector dimension does not match the codebook");
  const std::size_t m = codebook.sub_dim;
  std::vector<std::uint32_t> codes(codebook.num_subspaces);
  for (std::size_t s = 0; s < codebook.num_subspaces; ++s) {
    const float* x = vector.data() + s * m;
    std::uint32_t best = 0;
    float best_d = std::numeric_limits<float>::infinity();
    for (std::uint32_t c = 0; c < codebook.k; ++c) {
      const auto cen = codebook.centroid(s, c);
      float d = 0.0f;
      for (std::size_t i = 0; i < m; ++i) {
        const float diff = x[i] - cen[i];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    codes[s] = best;
  }
  return codes;
}

std::vector<float> pq_decode(std::span<const std::uint32_t> codes,
                             const PqCodebook& codebook) {
  require(codes.size() == codebook.num_subspaces, ErrorCode::kDimensionMismatch,
          "pq_decode: code count does not match the codebook");
  std::vector<float> out(codebook.dim());
  for (std::size_t s = 0; s < codes.size(); ++s) {
    require(codes[s] < codebook.k, ErrorCode::kInvalidArgument, "pq_decode: code out of range");
    const auto cen = codebook.centroid(s, codes[s]);
    std::copy(cen.begin(), cen.end(), out.begin() + s * codebook.sub_dim);
  }
  return out;
}

void pq_decode_into(std::span<const std::uint8_t> codes,
                    const PqCodebook& codebook, std::span<float> out) {
  for (std::size_t s = 0; s < codes.size(); ++s) {
    const auto cen = codebook.centroid(s, codes[s]);
    std::copy(cen.begin(), cen.end(), out.begin() + s * codebook.sub_dim);
  }
}

double pq_mse(std::span<const float> data, const PqCodebook& codebook) {
  const std::size_t dim = codebook.dim();
  require(dim >= 1 && data.size() % dim == 0, ErrorCode::kDimensionMismatch,
          "pq_mse: data is not a whole number of vectors");
  const std::size_t rows = data.size() / dim;
  if (rows == 0) return 0.0;
  double err = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto v = data.subspan(r * dim, dim);
    const auto rec = pq_decode(pq_encode(v, codebook), codebook);
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = static_cast<double>(v[i]) - rec[i];
      err += d * d;
    }
  }
  return err / static_cast<double>(rows);
}

double bits_per_dimension(std::uint32_t sub_dim, std::uint32_t k,
                          std::uint32_t dim) {
  require(sub_dim >= 1 && k >= 1 && dim % sub_dim == 0, ErrorCode::kInvalidArgument,
          "bits_per_dimension: sub_dim must divide dim");
  const double code_bits = std::ceil(std::log2(static_cast<double>(k)));
  return static_cast<double>(dim / sub_dim) * code_bits / static_cast<double>(dim);
}

std::vector<char> serialize_codebook(const PqCodebook& codebook) {
  detail::ByteWriter w;
  w.put_magic({kCodebookMagic, 4});
  w.put(codebook.sub_dim);
  w.put(codebook.k);
  w.put(codebook.num_subspaces);
  w.put_span(std::span<const float>(codebook.centroids));
  return std::move(w.bytes());
}

PqCodebook deserialize_codebook(std::span<const char> bytes) {
  detail::ByteReader r(bytes, "codebook file");
  r.expect_magic({kCodebookMagic, 4});
  PqCodebook cb;
  cb.sub_dim = r.get<std::uint32_t>();
  cb.k = r.get<std::uint32_t>();
  cb.num_subspaces = r.get<std::uint32_t>();
  if (cb.sub_dim == 0 || cb.k == 0 || cb.num_subspaces == 0)
    fail(ErrorCode::kFormat, "codebook file: zero dimension");
  const std::uint64_t count = std::uint64_t{cb.sub_dim} * cb.k * cb.num_subspaces;
  r.need_elements(count, sizeof(float));
  cb.centroids.resize(count);
  r.get_into(std::span<float>(cb.centroids));
  if (!r.at_end()) fail(ErrorCode::kFormat, "codebook file: trailing bytes");
  for (float x : cb.centroids)
    if (!std::isfinite(x)) fail(ErrorCode::kFormat, "codebook file: non-finite centroid");
  return cb;
}

void save_codebook(const PqCodebook& codebook,
                   const std::filesystem::path& path) {
  detail::atomic_write(path, serialize_codebook(codebook));
}

PqCodebook load_codebook(const std::filesystem::path& path) {
  return deserialize_codebook(detail::read_file(path));
}

}  // namespace lexroute
