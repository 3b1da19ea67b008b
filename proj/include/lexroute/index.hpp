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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexroute/quantizer.hpp"
#include "lexroute/types.hpp"

namespace lexroute {

/// Posting list of one key in structure-of-arrays layout. Entries are sorted
/// by ascending doc id. A plain index fills `vectors` (size() * dim floats,
/// each w * v); a quantized index fills `codes` (size() * num_subspaces).
/// `weights` keeps the original route weight of each entry for pruning.
struct PostingList {
  std::vector<std::uint32_t> doc_ids;
  std::vector<float> weights;
  std::vector<float> vectors;
  std::vector<std::uint8_t> codes;

  std::size_t size() const { return doc_ids.size(); }
  bool operator==(const PostingList&) const = default;
};

struct IndexMeta {
  std::uint32_t dim = 0;
  std::uint32_t cls_dim = 0;
  std::uint32_t key_count = 0;
  float tau = 0.0f;
  std::uint32_t doc_count = 0;
  Scheme scheme = Scheme::kDynamic;
  bool has_cls = false;
  bool quantized = false;

  bool operator==(const IndexMeta&) const = default;
};

/// Inverted index of pre-scaled routed token vectors, one posting list per
/// key, plus a dense store of sequence vectors that realizes the semantic key.
struct InvertedIndex {
  IndexMeta meta;
  std::vector<PostingList> postings;   // key_count lists
  std::vector<float> cls_store;        // doc_count * cls_dim when has_cls
  std::vector<std::string> doc_names;  // internal id -> external id
  std::optional<PqCodebook> codebook;  // set when quantized

  std::size_t total_entries() const;
  std::span<const float> cls_vector(std::uint32_t doc) const {
    return {cls_store.data() + std::size_t{doc} * meta.cls_dim, meta.cls_dim};
  }
};

bool operator==(const InvertedIndex& a, const InvertedIndex& b);

struct BuildOptions {
  float tau = 0.0f;
  bool with_cls = false;
  /// Number of keys; 0 means one past the largest key seen in the corpus.
  std::uint32_t key_count = 0;
  Scheme scheme = Scheme::kDynamic;
  /// 0 means worker_count().
  std::size_t threads = 0;
};

/// Keeps every document route with weight strictly above tau as the entry
/// (doc, w * v). The result is identical for every thread count.
InvertedIndex build_index(std::span<const EncodedDocument> docs,
                          const BuildOptions& options);

/// Drops entries with weight <= new_tau. Requires new_tau >= meta.tau.
InvertedIndex prune_index(const InvertedIndex& index, float new_tau);

/// Replaces posting vectors by PQ codes. Requires codebook.k <= 256 and a
/// codebook dimension equal to meta.dim.
InvertedIndex quantize_index(const InvertedIndex& index,
                             const PqCodebook& codebook);

/// All posting vectors (w * v) of a plain index, row after row.
std::vector<float> collect_posting_vectors(const InvertedIndex& index);

struct IndexStats {
  /// key_count lexical keys followed by the semantic key.
  std::vector<std::uint64_t> per_key_counts;
  std::vector<double> normalized_sizes;
  /// Tokens bucketed by number of routes above tau. Empty unless a corpus
  /// was supplied, since the index does not record deactivated tokens.
  std::vector<std::uint64_t> activated_keys_histogram;
  std::uint64_t total_entries = 0;
  std::uint64_t max_posting_length = 0;
  std::uint64_t nonempty_keys = 0;
};

IndexStats index_stats(const InvertedIndex& index,
                       std::span<const EncodedDocument> corpus = {});

/// Tokens bucketed by their count of routes with weight > tau.
std::vector<std::uint64_t> activated_keys_histogram(
    std::span<const EncodedDocument> corpus, float tau);

void save_index(const InvertedIndex& index, const std::filesystem::path& path);
InvertedIndex load_index(const std::filesystem::path& path);

/// In-memory twins of save_index / load_index, used for fuzzing.
std::vector<char> serialize_index(const InvertedIndex& index);
InvertedIndex deserialize_index(std::span<const char> bytes);

}  // namespace lexroute
