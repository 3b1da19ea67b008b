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

namespace lexroute {

/// Product-quantization codebook: `num_subspaces` tables of `k` centroids,
/// each of length `sub_dim`. Centroid c of subspace s starts at
/// (s * k + c) * sub_dim.
struct PqCodebook {
  std::uint32_t sub_dim = 0;
  std::uint32_t k = 0;
  std::uint32_t num_subspaces = 0;
  std::vector<float> centroids;

  std::uint32_t dim() const { return sub_dim * num_subspaces; }
  std::span<const float> centroid(std::size_t subspace, std::size_t code) const {
    return {centroids.data() + (subspace * k + code) * sub_dim, sub_dim};
  }
};

struct PqTrainOptions {
  std::uint32_t sub_dim = 4;
  std::uint32_t k = 256;
  std::uint32_t iterations = 25;
  std::uint64_t seed = 1234;
  /// Training sample cap; rows beyond it are subsampled with the seed.
  std::size_t max_samples = 100000;
};

struct PqTrainReport {
  /// k actually used; lower than requested when the sample has fewer
  /// distinct subvectors.
  std::uint32_t effective_k = 0;
  std::size_t sample_count = 0;
  /// Mean squared reconstruction error (summed over subspaces, averaged over
  /// rows) after seeding and after each Lloyd assignment step.
  std::vector<double> mse_trace;
};

/// Trains one k-means++-seeded Lloyd quantizer per subspace over `rows`
/// vectors of dimension `dim` stored contiguously in `data`.
PqCodebook train_pq(std::span<const float> data, std::size_t dim,
                    const PqTrainOptions& options,
                    PqTrainReport* report = nullptr);

/// Nearest centroid per subspace (Euclidean, ties to the lowest index).
std::vector<std::uint32_t> pq_encode(std::span<const float> vector,
                                     const PqCodebook& codebook);
void pq_encode_into(std::span<const float> vector, const PqCodebook& codebook,
                    std::span<std::uint8_t> codes);

std::vector<float> pq_decode(std::span<const std::uint32_t> codes,
                             const PqCodebook& codebook);
void pq_decode_into(std::span<const std::uint8_t> codes,
                    const PqCodebook& codebook, std::span<float> out);

/// Mean squared reconstruction error of `data` under `codebook`.
double pq_mse(std::span<const float> data, const PqCodebook& codebook);

/// Bits spent per original dimension: num_subspaces * ceil(log2 k) / dim.
double bits_per_dimension(std::uint32_t sub_dim, std::uint32_t k,
                          std::uint32_t dim);

void save_codebook(const PqCodebook& codebook,
                   const std::filesystem::path& path);
PqCodebook load_codebook(const std::filesystem::path& path);
std::vector<char> serialize_codebook(const PqCodebook& codebook);
PqCodebook deserialize_codebook(std::span<const char> bytes);

}  // namespace lexroute
