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

#include "lexroute/index.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_set>

#include "binary_io.hpp"
#include "lexroute/common.hpp"

// Index file layout (little-endian):
//
//   "CTDL" | version u32 | dim u32 | cls_dim u32 | key_count u32 | tau f32 |
//   doc_count u32 | flags u32
//   [codebook block, when quantized: same bytes as a codebook file]
//   key_count blocks: key_id u32 | entry_count u32 |
//                     entry_count x (doc_id u32 | weight f32 | payload)
//   [cls block, when has_cls: doc_count x cls_dim f32]
//   doc_count x (length u32 | bytes)
//
// payload is dim f32 for a plain index and num_subspaces u8 codes for a
// quantized one. flags: bit 0 has_cls, bit 1 quantized, bits 8..15 scheme.

namespace lexroute {
namespace {

constexpr char kIndexMagic[] = "CTDL";
constexpr std::uint32_t kIndexVersion = 1;
constexpr std::uint32_t kFlagCls = 1u << 0;
constexpr std::uint32_t kFlagQuantized = 1u << 1;

std::uint32_t corpus_dim(std::span<const EncodedDocument> docs) {
  for (const auto& d : docs)
    if (!d.tokens.empty()) return static_cast<std::uint32_t>(d.tokens.front().vector.size());
  return 0;
}

std::uint32_t max_key_plus_one(std::span<const EncodedDocument> docs) {
  std::uint32_t n = 0;
  for (const auto& d : docs)
    for (const auto& t : d.tokens)
      for (const auto& r : t.routes) n = std::max(n, r.key + 1);
  return n;
}

// Builds postings for docs [begin, end) into `out` (key_count lists).
void build_shard(std::span<const EncodedDocument> docs, std::size_t begin,
                 std::size_t end, float tau, std::uint32_t key_count,
                 std::uint32_t dim, std::vector<PostingList>& out) {
  out.assign(key_count, {});
  for (std::size_t d = begin; d < end; ++d) {
    for (const auto& token : docs[d].tokens) {
      for (const auto& route : token.routes) {
        if (!(route.weight > tau)) continue;
        auto& list = out[route.key];
        list.doc_ids.push_back(static_cast<std::uint32_t>(d));
        list.weights.push_back(route.weight);
        for (std::uint32_t i = 0; i < dim; ++i)
          list.vectors.push_back(route.weight * token.vector[i]);
      }
    }
  }
}

void validate_docs(std::span<const EncodedDocument> docs, std::uint32_t dim,
                   std::uint32_t key_count, bool with_cls) {
  std::unordered_set<std::string> seen;
  std::size_t cls_dim = 0;
  bool first_cls = true;
  for (const auto& doc : docs) {
    if (!seen.insert(doc.id).second)
      fail(ErrorCode::kInvalidArgument, "build_index: duplicate doc id '" + doc.id + "'");
    for (const auto& t : doc.tokens) {
      require(t.vector.size() == dim, ErrorCode::kDimensionMismatch,
              "build_index: token vector dimensions differ");
      for (const auto& r : t.routes) {
        require(r.key < key_count, ErrorCode::kInvalidArgument,
                "build_index: route key out of range");
        require(std::isfinite(r.weight) && r.weight >= 0.0f, ErrorCode::kNumeric,
                "build_index: invalid route weight");
      }
      require(std::all_of(t.vector.begin(), t.vector.end(),
                          [](float x) { return std::isfinite(x); }),
              ErrorCode::kNumeric, "build_index: non-finite token vector");
    }
    if (with_cls) {
      if (!doc.cls) fail(ErrorCode::kInvalidArgument, "build_index: sequence vector missing for '" + doc.id + "'");
      if (first_cls) {
        cls_dim = doc.cls->size();
        first_cls = false;
      }
      require(doc.cls->size() == cls_dim, ErrorCode::kDimensionMismatch,
              "build_index: sequence vector dimensions differ");
    }
  }
}

std::uint32_t pack_flags(const IndexMeta& meta) {
  std::uint32_t flags = static_cast<std::uint32_t>(meta.scheme) << 8;
  if (meta.has_cls) flags |= kFlagCls;
  if (meta.quantized) flags |= kFlagQuantized;
  return flags;
}

}  // namespace

std::size_t InvertedIndex::total_entries() const {
  std::size_t n = 0;
  for (const auto& p : postings) n += p.size();
  return n;
}

bool operator==(const InvertedIndex& a, const InvertedIndex& b) {
  const auto same_codebook = [&] {
    if (a.codebook.has_value() != b.codebook.has_value()) return false;
    if (!a.codebook) return true;
    return a.codebook->sub_dim == b.codebook->sub_dim && a.codebook->k == b.codebook->k &&
           a.codebook->num_subspaces == b.codebook->num_subspaces &&
           a.codebook->centroids == b.codebook->centroids;
  };
  return a.meta == b.meta && a.postings == b.postings && a.cls_store == b.cls_store &&
         a.doc_names == b.doc_names && same_codebook();
}

InvertedIndex build_index(std::span<const EncodedDocument> docs,
                          const BuildOptions& options) {
  require(!(options.tau < 0.0f), ErrorCode::kInvalidArgument,
          "build_index: tau must be >= 0");
  InvertedIndex index;
  auto& meta = index.meta;
  meta.dim = corpus_dim(docs);
  meta.key_count = options.key_count != 0 ? options.key_count : max_key_plus_one(docs);
  meta.tau = options.tau;
  meta.doc_count = static_cast<std::uint32_t>(docs.size());
  meta.scheme = options.scheme;
  meta.has_cls = options.with_cls;
  validate_docs(docs, meta.dim, meta.key_count, options.with_cls);

  const std::size_t workers =
      options.threads != 0
          ? std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(1, docs.size()))
          : std::clamp<std::size_t>(worker_count(), 1, std::max<std::size_t>(1, docs.size() / 64));
  std::vector<std::vector<PostingList>> shards(workers);
  const std::size_t per = (docs.size() + workers - 1) / workers;
  if (workers == 1) {
    build_shard(docs, 0, docs.size(), meta.tau, meta.key_count, meta.dim, shards[0]);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(docs.size(), w * per);
      const std::size_t end = std::min(docs.size(), begin + per);
      pool.emplace_back([&, w, begin, end] {
        build_shard(docs, begin, end, meta.tau, meta.key_count, meta.dim, shards[w]);
      });
    }
  }

  // Shards cover increasing doc ranges, so concatenation keeps doc order.
  index.postings.resize(meta.key_count);
  for (std::uint32_t k = 0; k < meta.key_count; ++k) {
    auto& list = index.postings[k];
    for (auto& shard : shards) {
      auto& part = shard[k];
      list.doc_ids.insert(list.doc_ids.end(), part.doc_ids.begin(), part.doc_ids.end());
      list.weights.insert(list.weights.end(), part.weights.begin(), part.weights.end());
      list.vectors.insert(list.vectors.end(), part.vectors.begin(), part.vectors.end());
    }
  }

  index.doc_names.reserve(docs.size());
  for (const auto& d : docs) index.doc_names.push_back(d.id);
  if (options.with_cls) {
    meta.cls_dim = docs.empty() ? 0 : static_cast<std::uint32_t>(docs.front().cls->size());
    index.cls_store.reserve(std::size_t{meta.cls_dim} * docs.size());
    for (const auto& d : docs) index.cls_store.insert(index.cls_store.end(), d.cls->begin(), d.cls->end());
  }
  return index;
}

InvertedIndex prune_index(const InvertedIndex& index, float new_tau) {
  require(new_tau >= index.meta.tau, ErrorCode::kInvalidArgument,
          "prune_index: new tau must be >= the index tau");
  InvertedIndex out;
  out.meta = index.meta;
  out.meta.tau = new_tau;
  out.cls_store = index.cls_store;
  out.doc_names = index.doc_names;
  out.codebook = index.codebook;
  out.postings.resize(index.postings.size());
  const std::size_t stride =
      index.meta.quantized ? index.codebook->num_subspaces : index.meta.dim;
  for (std::size_t k = 0; k < index.postings.size(); ++k) {
    const auto& src = index.postings[k];
    auto& dst = out.postings[k];
    for (std::size_t e = 0; e < src.size(); ++e) {
      if (!(src.weights[e] > new_tau)) continue;
      dst.doc_ids.push_back(src.doc_ids[e]);
      dst.weights.push_back(src.weights[e]);
      if (index.meta.quantized) {
        dst.codes.insert(dst.codes.end(), src.codes.begin() + e * stride,
                         src.codes.begin() + (e + 1) * stride);
      } else {
        dst.vectors.insert(dst.vectors.end(), src.vectors.begin() + e * stride,
                           src.vectors.begin() + (e + 1) * stride);
      }
    }
  }
  return out;
}

std::vector<float> collect_posting_vectors(const InvertedIndex& index) {
  require(!index.meta.quantized, ErrorCode::kState,
          "collect_posting_vectors: index is already quantized");
  std::vector<float> all;
  all.reserve(index.total_entries() * index.meta.dim);
  for (const auto& p : index.postings) all.insert(all.end(), p.vectors.begin(), p.vectors.end());
  return all;
}

InvertedIndex quantize_index(const InvertedIndex& index,
                             const PqCodebook& codebook) {
  require(!index.meta.quantized, ErrorCode::kState,
          "quantize_index: index is already quantized");
  require(codebook.dim() == index.meta.dim, ErrorCode::kDimensionMismatch,
          "quantize_index: codebook dimension does not match the index");
  require(codebook.k >= 1 && codebook.k <= 256, ErrorCode::kInvalidArgument,
          "quantize_index: codes are stored as u8, k must be <= 256");
  InvertedIndex out;
  out.meta = index.meta;
  out.meta.quantized = true;
  out.cls_store = index.cls_store;
  out.doc_names = index.doc_names;
  out.codebook = codebook;
  out.postings.resize(index.postings.size());
  const std::size_t dim = index.meta.dim;
  for (std::size_t k = 0; k < index.postings.size(); ++k) {
    const auto& src = index.postings[k];
    auto& dst = out.postings[k];
    dst.doc_ids = src.doc_ids;
    dst.weights = src.weights;
    dst.codes.resize(src.size() * codebook.num_subspaces);
    for (std::size_t e = 0; e < src.size(); ++e) {
      pq_encode_into({src.vectors.data() + e * dim, dim}, codebook,
                     {dst.codes.data() + e * codebook.num_subspaces, codebook.num_subspaces});
    }
  }
  return out;
}

std::vector<std::uint64_t> activated_keys_histogram(
    std::span<const EncodedDocument> corpus, float tau) {
  std::vector<std::uint64_t> hist(1, 0);
  for (const auto& doc : corpus) {
    for (const auto& t : doc.tokens) {
      const auto n = static_cast<std::size_t>(std::count_if(
          t.routes.begin(), t.routes.end(), [tau](const Route& r) { return r.weight > tau; }));
      if (n >= hist.size()) hist.resize(n + 1, 0);
      ++hist[n];
    }
  }
  return hist;
}

IndexStats index_stats(const InvertedIndex& index,
                       std::span<const EncodedDocument> corpus) {
  IndexStats stats;
  const std::size_t keys = index.meta.key_count;
  stats.per_key_counts.assign(keys + 1, 0);
  for (std::size_t k = 0; k < keys; ++k) {
    const std::uint64_t n = index.postings[k].size();
    stats.per_key_counts[k] = n;
    stats.total_entries += n;
    stats.max_posting_length = std::max(stats.max_posting_length, n);
    if (n > 0) ++stats.nonempty_keys;
  }
  if (index.meta.has_cls) stats.per_key_counts[keys] = index.meta.doc_count;
  std::uint64_t all = 0;
  for (auto n : stats.per_key_counts) all += n;
  stats.normalized_sizes.assign(keys + 1, 0.0);
  if (all > 0)
    for (std::size_t k = 0; k <= keys; ++k)
      stats.normalized_sizes[k] = static_cast<double>(stats.per_key_counts[k]) / static_cast<double>(all);
  if (!corpus.empty()) stats.activated_keys_histogram = activated_keys_histogram(corpus, index.meta.tau);
  return stats;
}

std::vector<char> serialize_index(const InvertedIndex& index) {
  const auto& meta = index.meta;
  detail::ByteWriter w;
  w.put_magic({kIndexMagic, 4});
  w.put(kIndexVersion);
  w.put(meta.dim);
  w.put(meta.cls_dim);
  w.put(meta.key_count);
  w.put(meta.tau);
  w.put(meta.doc_count);
  w.put(pack_flags(meta));
  if (meta.quantized) {
    const auto cb = serialize_codebook(*index.codebook);
    w.bytes().insert(w.bytes().end(), cb.begin(), cb.end());
  }
  const std::size_t stride = meta.quantized ? index.codebook->num_subspaces : meta.dim;
  for (std::uint32_t k = 0; k < meta.key_count; ++k) {
    const auto& list = index.postings[k];
    w.put(k);
    w.put(static_cast<std::uint32_t>(list.size()));
    for (std::size_t e = 0; e < list.size(); ++e) {
      w.put(list.doc_ids[e]);
      w.put(list.weights[e]);
      if (meta.quantized)
        w.put_span(std::span<const std::uint8_t>(list.codes.data() + e * stride, stride));
      else
        w.put_span(std::span<const float>(list.vectors.data() + e * stride, stride));
    }
  }
  if (meta.has_cls) w.put_span(std::span<const float>(index.cls_store));
  for (const auto& name : index.doc_names) w.put_string(name);
  return std::move(w.bytes());
}

InvertedIndex deserialize_index(std::span<const char> bytes) {
  detail::ByteReader r(bytes, "index file");
  r.expect_magic({kIndexMagic, 4});
  if (r.get<std::uint32_t>() != kIndexVersion) fail(ErrorCode::kFormat, "index file: unsupported version");
  InvertedIndex index;
  auto& meta = index.meta;
  meta.dim = r.get<std::uint32_t>();
  meta.cls_dim = r.get<std::uint32_t>();
  meta.key_count = r.get<std::uint32_t>();
  meta.tau = r.get<float>();
  meta.doc_count = r.get<std::uint32_t>();
  const auto flags = r.get<std::uint32_t>();
  meta.has_cls = (flags & kFlagCls) != 0;
  meta.quantized = (flags & kFlagQuantized) != 0;
  const auto scheme = (flags >> 8) & 0xffu;
  if ((flags & ~(kFlagCls | kFlagQuantized | 0xff00u)) != 0 || scheme > 3)
    fail(ErrorCode::kFormat, "index file: unknown flags");
  meta.scheme = static_cast<Scheme>(scheme);
  if (std::isnan(meta.tau) || meta.tau < 0.0f) fail(ErrorCode::kFormat, "index file: invalid tau");

  std::size_t stride = meta.dim;
  std::size_t payload_bytes = std::size_t{meta.dim} * sizeof(float);
  if (meta.quantized) {
    // The codebook block is self-delimiting: 16 header bytes plus centroids.
    r.need_elements(16, 1);
    const auto rest = bytes.subspan(bytes.size() - r.remaining());
    detail::ByteReader peek(rest, "index codebook");
    peek.expect_magic("CTPQ");
    const auto m = peek.get<std::uint32_t>();
    const auto k = peek.get<std::uint32_t>();
    const auto s = peek.get<std::uint32_t>();
    const std::uint64_t cb_bytes = 16 + std::uint64_t{m} * k * s * sizeof(float);
    r.need_elements(cb_bytes, 1);
    index.codebook = deserialize_codebook(rest.subspan(0, cb_bytes));
    std::vector<char> skip(cb_bytes);
    r.get_into(std::span<char>(skip));
    if (index.codebook->dim() != meta.dim || index.codebook->k > 256)
      fail(ErrorCode::kFormat, "index file: codebook does not match the index");
    stride = index.codebook->num_subspaces;
    payload_bytes = stride;
  }

  // Each key block needs at least 8 bytes, which bounds key_count.
  r.need_elements(meta.key_count, 8);
  index.postings.resize(meta.key_count);
  for (std::uint32_t k = 0; k < meta.key_count; ++k) {
    if (r.get<std::uint32_t>() != k) fail(ErrorCode::kFormat, "index file: key blocks out of order");
    const auto count = r.get<std::uint32_t>();
    r.need_elements(count, 8 + payload_bytes);
    auto& list = index.postings[k];
    list.doc_ids.resize(count);
    list.weights.resize(count);
    if (meta.quantized)
      list.codes.resize(std::size_t{count} * stride);
    else
      list.vectors.resize(std::size_t{count} * stride);
    for (std::uint32_t e = 0; e < count; ++e) {
      list.doc_ids[e] = r.get<std::uint32_t>();
      list.weights[e] = r.get<float>();
      if (list.doc_ids[e] >= meta.doc_count || (e > 0 && list.doc_ids[e] < list.doc_ids[e - 1]))
        fail(ErrorCode::kFormat, "index file: invalid posting doc id");
      if (!std::isfinite(list.weights[e]) || !(list.weights[e] > meta.tau))
        fail(ErrorCode::kFormat, "index file: posting weight not above tau");
      if (meta.quantized) {
        auto codes = std::span<std::uint8_t>(list.codes.data() + std::size_t{e} * stride, stride);
        r.get_into(codes);
        for (auto c : codes)
          if (c >= index.codebook->k) fail(ErrorCode::kFormat, "index file: code out of range");
      } else {
        r.get_into(std::span<float>(list.vectors.data() + std::size_t{e} * stride, stride));
      }
    }
  }
  if (meta.has_cls) {
    r.need_elements(std::uint64_t{meta.doc_count} * meta.cls_dim, sizeof(float));
    index.cls_store.resize(std::size_t{meta.doc_count} * meta.cls_dim);
    r.get_into(std::span<float>(index.cls_store));
  } else if (meta.cls_dim != 0) {
    fail(ErrorCode::kFormat, "index file: cls_dim set without a cls block");
  }
  r.need_elements(meta.doc_count, 4);
  index.doc_names.reserve(meta.doc_count);
  for (std::uint32_t d = 0; d < meta.doc_count; ++d) index.doc_names.push_back(r.get_string());
  if (!r.at_end()) fail(ErrorCode::kFormat, "index file: trailing bytes");
  return index;
}

void save_index(const InvertedIndex& index, const std::filesystem::path& path) {
  detail::atomic_write(path, serialize_index(index));
}

InvertedIndex load_index(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return deserialize_index(bytes);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFormat) fail(ErrorCode::kFormat, path.string() + ": " + e.what());
    throw;
  }
}

}  // namespace lexroute
