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

#include "lexroute/lexroute.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <cstdlib>
#include <json.hpp>
#include <memory>
#include <new>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "lexroute/common.hpp"
#include "lexroute/embedding_io.hpp"
#include "lexroute/eval.hpp"
#include "lexroute/index.hpp"
#include "lexroute/quantizer.hpp"
#include "lexroute/retrieval.hpp"
#include "lexroute/router.hpp"
#include "lexroute/scoring.hpp"
#include "lexroute/synthetic.hpp"
#include "lexroute/training.hpp"

using nlohmann::json;

struct lxr_router {
  lexroute::RouterParams params;
};

struct lxr_corpus {
  std::vector<lexroute::EncodedSequence> sequences;
};

struct lxr_index {
  lexroute::InvertedIndex index;
};

struct lxr_codebook {
  lexroute::PqCodebook codebook;
};

struct lxr_results {
  std::vector<std::string> query_ids;
  std::vector<std::vector<lexroute::RankedDoc>> ranked;
  std::uint64_t dot_products = 0;
};

namespace {

thread_local std::string g_last_error;

lxr_status set_error(lxr_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
lxr_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LXR_OK;
  } catch (const lexroute::Error& e) {
    return set_error(static_cast<lxr_status>(e.code()), e.what());
  } catch (const json::exception& e) {
    return set_error(LXR_ERR_INVALID_ARGUMENT, std::string("options: ") + e.what());
  } catch (const std::bad_alloc&) {
    return set_error(LXR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(LXR_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(LXR_ERR_INTERNAL, "unknown error");
  }
}

void require_arg(const void* p, const char* name) {
  if (p == nullptr) lexroute::fail(lexroute::ErrorCode::kInvalidArgument, std::string(name) + " is null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// JSON options object that rejects keys nobody asked for.
class Options {
 public:
  explicit Options(const char* text) {
    if (text != nullptr && std::string_view(text).find_first_not_of(" \t\r\n") != std::string_view::npos)
      j_ = json::parse(text);
    if (j_.is_null()) j_ = json::object();
    if (!j_.is_object()) lexroute::fail(lexroute::ErrorCode::kInvalidArgument, "options must be a JSON object");
  }

  template <typename T>
  T get(const char* key, T fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_[key];
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) bad(key, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) bad(key, "an integer");
      if (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) bad(key, "non-negative");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) bad(key, "a number");
    } else {
      if (!v.is_string()) bad(key, "a string");
    }
    return v.get<T>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) lexroute::fail(lexroute::ErrorCode::kInvalidArgument, "unknown option '" + key + "'");
  }

 private:
  [[noreturn]] static void bad(const char* key, const char* what) {
    lexroute::fail(lexroute::ErrorCode::kInvalidArgument, std::string("option '") + key + "' must be " + what);
  }

  json j_;
  std::set<std::string> used_;
};

lexroute::SyntheticConfig synthetic_config(Options& o, lexroute::SyntheticConfig c) {
  c.docs = o.get("docs", c.docs);
  c.tokens_per_doc = o.get("tokens_per_doc", c.tokens_per_doc);
  c.dim = o.get("dim", c.dim);
  c.vocab = o.get("vocab", c.vocab);
  c.cluster_count = o.get("cluster_count", c.cluster_count);
  c.skew = o.get("skew", c.skew);
  c.queries = o.get("queries", c.queries);
  c.query_tokens = o.get("query_tokens", c.query_tokens);
  c.with_cls = o.get("with_cls", c.with_cls);
  c.noise = o.get("noise", c.noise);
  c.seed = o.get("seed", c.seed);
  return c;
}

lexroute::ToyTrainConfig toy_config(Options& o) {
  lexroute::ToyTrainConfig c;
  const auto seed = o.get("seed", c.seed);
  c.corpus = synthetic_config(o, c.corpus);
  c.seed = seed;
  c.key_count = o.get("key_count", c.key_count);
  c.negatives = o.get("negatives", c.negatives);
  c.steps = o.get("steps", c.steps);
  c.learning_rate = o.get("learning_rate", c.learning_rate);
  c.weights.alpha = o.get("alpha", c.weights.alpha);
  c.weights.beta = o.get("beta", c.weights.beta);
  c.limits.query_keys = o.get("query_keys", c.limits.query_keys);
  c.limits.doc_keys = o.get("doc_keys", c.limits.doc_keys);
  c.init_stddev = o.get("init_stddev", c.init_stddev);
  c.init_bias = o.get("init_bias", c.init_bias);
  return c;
}

json loss_json(const lexroute::LossBreakdown& l) {
  return {{"total", l.total},
          {"contrastive", l.contrastive},
          {"router", l.router},
          {"balance", l.balance},
          {"sparsity", l.sparsity}};
}

json balance_json(const lexroute::PostingBalance& b) {
  return {{"entries", b.entries},
          {"max_posting", b.max_posting},
          {"ratio", b.ratio},
          {"deactivated_tokens", b.deactivated_tokens},
          {"tokens", b.tokens}};
}

json latency_json(const lexroute::LatencyBreakdown& l) {
  return {{"routing_ns", l.routing_ns},
          {"token_retrieval_ns", l.token_retrieval_ns},
          {"scatter_ns", l.scatter_ns},
          {"sort_ns", l.sort_ns},
          {"total_ns", l.total_ns}};
}

// Shortest decimal that reads back as the same float.
double float_for_json(float x) {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, x).ptr;
  return std::strtod(std::string(buf, end).c_str(), nullptr);
}

void write_json(char** out, const json& j) {
  if (out != nullptr) *out = copy_string(j.dump());
}

lexroute::SearchOptions search_options(Options& o, const lxr_router* router) {
  lexroute::SearchOptions s;
  s.top_k = o.get("top_k", s.top_k);
  s.with_cls = o.get("with_cls", s.with_cls);
  s.query_keys = o.get("query_keys", s.query_keys);
  s.router = router != nullptr ? &router->params : nullptr;
  return s;
}

}  // namespace

extern "C" {

const char* lxr_last_error(void) { return g_last_error.c_str(); }

const char* lxr_version(void) { return "0.1.0"; }

void lxr_string_free(char* s) { std::free(s); }

lxr_status lxr_router_load(const char* path, lxr_router** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = new lxr_router{lexroute::load_router(path)};
  });
}

lxr_status lxr_router_random(uint32_t dim, uint32_t key_count, uint64_t seed, float stddev,
                             float bias, lxr_router** out) {
  return guarded([&] {
    require_arg(out, "out");
    lexroute::require(dim >= 1 && key_count >= 1, lexroute::ErrorCode::kInvalidArgument,
                      "router: dim and key_count must be >= 1");
    *out = new lxr_router{lexroute::RouterParams::random(dim, key_count, seed, stddev, bias)};
  });
}

lxr_status lxr_router_save(const lxr_router* router, const char* path) {
  return guarded([&] {
    require_arg(router, "router");
    require_arg(path, "path");
    lexroute::save_router(router->params, path);
  });
}

lxr_status lxr_router_dims(const lxr_router* router, uint32_t* dim, uint32_t* key_count) {
  return guarded([&] {
    require_arg(router, "router");
    if (dim) *dim = router->params.dim;
    if (key_count) *key_count = router->params.key_count;
  });
}

void lxr_router_free(lxr_router* router) { delete router; }

lxr_status lxr_corpus_load(const char* path, lxr_corpus** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = new lxr_corpus{lexroute::read_embeddings(path)};
  });
}

lxr_status lxr_corpus_save(const lxr_corpus* corpus, const char* path, int binary) {
  return guarded([&] {
    require_arg(corpus, "corpus");
    require_arg(path, "path");
    if (binary) {
      lexroute::write_embeddings_binary(corpus->sequences, path);
    } else {
      lexroute::write_embeddings_jsonl(corpus->sequences, path);
    }
  });
}

lxr_status lxr_corpus_route(lxr_corpus* corpus, const char* scheme, const lxr_router* router,
                            uint32_t max_keys) {
  return guarded([&] {
    require_arg(corpus, "corpus");
    require_arg(scheme, "scheme");
    const auto s = lexroute::parse_scheme(scheme);
    if (s == lexroute::Scheme::kDynamic) require_arg(router, "router");
    std::vector<lexroute::EncodedSequence> routed = corpus->sequences;
    for (auto& seq : routed) lexroute::route_sequence(seq, s, router ? &router->params : nullptr, max_keys);
    corpus->sequences = std::move(routed);
  });
}

size_t lxr_corpus_size(const lxr_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->sequences.size();
}

lxr_status lxr_corpus_dims(const lxr_corpus* corpus, uint32_t* dim, uint32_t* cls_dim) {
  return guarded([&] {
    require_arg(corpus, "corpus");
    uint32_t d = 0, c = 0;
    for (const auto& s : corpus->sequences) {
      if (d == 0 && !s.tokens.empty()) d = static_cast<uint32_t>(s.tokens.front().vector.size());
      if (c == 0 && s.cls) c = static_cast<uint32_t>(s.cls->size());
    }
    if (dim) *dim = d;
    if (cls_dim) *cls_dim = c;
  });
}

void lxr_corpus_free(lxr_corpus* corpus) { delete corpus; }

lxr_status lxr_generate(const char* config_json, const char* docs_path, const char* queries_path,
                        const char* qrels_path, int binary) {
  return guarded([&] {
    require_arg(docs_path, "docs_path");
    Options o(config_json);
    const auto config = synthetic_config(o, {});
    o.finish();
    const auto data = lexroute::generate_synthetic(config);
    const auto write = [binary](const std::vector<lexroute::EncodedSequence>& s, const char* path) {
      if (binary) {
        lexroute::write_embeddings_binary(s, path);
      } else {
        lexroute::write_embeddings_jsonl(s, path);
      }
    };
    write(data.docs, docs_path);
    if (queries_path) write(data.queries, queries_path);
    if (qrels_path) lexroute::write_qrels(data.qrels, qrels_path);
  });
}

lxr_status lxr_index_build(const lxr_corpus* docs, const char* options_json, lxr_index** out) {
  return guarded([&] {
    require_arg(docs, "docs");
    require_arg(out, "out");
    Options o(options_json);
    lexroute::BuildOptions b;
    b.tau = o.get("tau", b.tau);
    b.with_cls = o.get("with_cls", b.with_cls);
    b.key_count = o.get("key_count", b.key_count);
    b.scheme = lexroute::parse_scheme(o.get("scheme", std::string(lexroute::scheme_name(b.scheme))));
    b.threads = o.get("threads", b.threads);
    o.finish();
    *out = new lxr_index{lexroute::build_index(docs->sequences, b)};
  });
}

lxr_status lxr_index_load(const char* path, lxr_index** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = new lxr_index{lexroute::load_index(path)};
  });
}

lxr_status lxr_index_save(const lxr_index* index, const char* path) {
  return guarded([&] {
    require_arg(index, "index");
    require_arg(path, "path");
    lexroute::save_index(index->index, path);
  });
}

lxr_status lxr_index_prune(const lxr_index* index, float tau, lxr_index** out) {
  return guarded([&] {
    require_arg(index, "index");
    require_arg(out, "out");
    *out = new lxr_index{lexroute::prune_index(index->index, tau)};
  });
}

lxr_status lxr_index_quantize(const lxr_index* index, const lxr_codebook* codebook,
                              lxr_index** out) {
  return guarded([&] {
    require_arg(index, "index");
    require_arg(codebook, "codebook");
    require_arg(out, "out");
    *out = new lxr_index{lexroute::quantize_index(index->index, codebook->codebook)};
  });
}

lxr_status lxr_index_stats(const lxr_index* index, const lxr_corpus* docs, char** out_json) {
  return guarded([&] {
    require_arg(index, "index");
    require_arg(out_json, "out_json");
    const auto& meta = index->index.meta;
    const auto stats = docs ? lexroute::index_stats(index->index, docs->sequences)
                            : lexroute::index_stats(index->index);
    json j{{"dim", meta.dim},
           {"cls_dim", meta.cls_dim},
           {"key_count", meta.key_count},
           {"tau", float_for_json(meta.tau)},
           {"doc_count", meta.doc_count},
           {"scheme", lexroute::scheme_name(meta.scheme)},
           {"has_cls", meta.has_cls},
           {"quantized", meta.quantized},
           {"total_entries", stats.total_entries},
           {"max_posting_length", stats.max_posting_length},
           {"nonempty_keys", stats.nonempty_keys},
           {"per_key_counts", stats.per_key_counts},
           {"normalized_sizes", stats.normalized_sizes}};
    if (docs) j["activated_keys_histogram"] = stats.activated_keys_histogram;
    write_json(out_json, j);
  });
}

uint64_t lxr_index_entries(const lxr_index* index) {
  return index == nullptr ? 0 : index->index.total_entries();
}

void lxr_index_free(lxr_index* index) { delete index; }

lxr_status lxr_codebook_train(const lxr_index* index, const char* options_json,
                              lxr_codebook** out, char** report_json) {
  return guarded([&] {
    require_arg(index, "index");
    require_arg(out, "out");
    Options o(options_json);
    lexroute::PqTrainOptions p;
    p.sub_dim = o.get("sub_dim", p.sub_dim);
    p.k = o.get("k", p.k);
    p.iterations = o.get("iterations", p.iterations);
    p.seed = o.get("seed", p.seed);
    p.max_samples = o.get("max_samples", p.max_samples);
    o.finish();
    const auto data = lexroute::collect_posting_vectors(index->index);
    lexroute::PqTrainReport report;
    auto codebook = lexroute::train_pq(data, index->index.meta.dim, p, &report);
    write_json(report_json,
               json{{"effective_k", report.effective_k},
                    {"sample_count", report.sample_count},
                    {"mse_trace", report.mse_trace},
                    {"bits_per_dim", lexroute::bits_per_dimension(codebook.sub_dim, codebook.k,
                                                                  codebook.dim())}});
    *out = new lxr_codebook{std::move(codebook)};
  });
}

lxr_status lxr_codebook_load(const char* path, lxr_codebook** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = new lxr_codebook{lexroute::load_codebook(path)};
  });
}

lxr_status lxr_codebook_save(const lxr_codebook* codebook, const char* path) {
  return guarded([&] {
    require_arg(codebook, "codebook");
    require_arg(path, "path");
    lexroute::save_codebook(codebook->codebook, path);
  });
}

void lxr_codebook_free(lxr_codebook* codebook) { delete codebook; }

lxr_status lxr_search(const lxr_index* index, const lxr_corpus* queries, const lxr_router* router,
                      const char* options_json, lxr_results** out) {
  return guarded([&] {
    require_arg(index, "index");
    require_arg(queries, "queries");
    require_arg(out, "out");
    Options o(options_json);
    const auto options = search_options(o, router);
    o.finish();
    auto results = std::make_unique<lxr_results>();
    for (const auto& q : queries->sequences) {
      auto r = lexroute::search(q, index->index, options);
      results->query_ids.push_back(q.id);
      results->ranked.push_back(std::move(r.ranked));
      results->dot_products += r.dot_products_used;
    }
    *out = results.release();
  });
}

lxr_status lxr_brute_force(const lxr_corpus* docs, const lxr_corpus* queries,
                           const char* options_json, lxr_results** out) {
  return guarded([&] {
    require_arg(docs, "docs");
    require_arg(queries, "queries");
    require_arg(out, "out");
    Options o(options_json);
    const auto top_k = o.get<std::size_t>("top_k", 10);
    const auto scheme = lexroute::parse_scheme(o.get<std::string>("scheme", "dynamic"));
    const bool with_cls = o.get("with_cls", false);
    const float tau = o.get("tau", 0.0f);
    lexroute::RankOptions rank;
    rank.reachable_only = o.get("reachable_only", rank.reachable_only);
    o.finish();
    std::vector<lexroute::EncodedDocument> pruned;
    pruned.reserve(docs->sequences.size());
    for (const auto& d : docs->sequences) pruned.push_back(lexroute::drop_routes_at_or_below(d, tau));
    auto results = std::make_unique<lxr_results>();
    for (const auto& q : queries->sequences) {
      results->query_ids.push_back(q.id);
      results->ranked.push_back(lexroute::brute_force_rank(q, pruned, top_k, scheme, with_cls, rank));
    }
    *out = results.release();
  });
}

size_t lxr_results_query_count(const lxr_results* results) {
  return results == nullptr ? 0 : results->query_ids.size();
}

lxr_status lxr_results_query(const lxr_results* results, size_t query, const char** query_id,
                             size_t* count) {
  return guarded([&] {
    require_arg(results, "results");
    lexroute::require(query < results->query_ids.size(), lexroute::ErrorCode::kInvalidArgument,
                      "results: query index out of range");
    if (query_id) *query_id = results->query_ids[query].c_str();
    if (count) *count = results->ranked[query].size();
  });
}

lxr_status lxr_results_entry(const lxr_results* results, size_t query, size_t rank,
                             const char** doc_id, float* score) {
  return guarded([&] {
    require_arg(results, "results");
    lexroute::require(query < results->ranked.size() && rank < results->ranked[query].size(),
                      lexroute::ErrorCode::kInvalidArgument, "results: index out of range");
    const auto& r = results->ranked[query][rank];
    if (doc_id) *doc_id = r.doc_id.c_str();
    if (score) *score = r.score;
  });
}

uint64_t lxr_results_dot_products(const lxr_results* results) {
  return results == nullptr ? 0 : results->dot_products;
}

lxr_status lxr_results_write_run(const lxr_results* results, const char* path) {
  return guarded([&] {
    require_arg(results, "results");
    require_arg(path, "path");
    std::vector<std::pair<std::string, std::vector<lexroute::RankedDoc>>> pairs;
    for (std::size_t q = 0; q < results->query_ids.size(); ++q)
      pairs.emplace_back(results->query_ids[q], results->ranked[q]);
    lexroute::write_run(lexroute::make_run(pairs), path);
  });
}

lxr_status lxr_results_compare(const lxr_results* a, const lxr_results* b, double rel_tol,
                               int* equal, char** report_json) {
  return guarded([&] {
    require_arg(a, "a");
    require_arg(b, "b");
    require_arg(equal, "equal");
    lexroute::require(rel_tol >= 0.0, lexroute::ErrorCode::kInvalidArgument,
                      "compare: tolerance must be >= 0");
    json report{{"equal", true}, {"queries", a->query_ids.size()}, {"max_relative_error", 0.0}};
    double worst = 0.0;
    std::string first;
    const auto note = [&](const std::string& what) {
      if (first.empty()) first = what;
    };
    if (a->query_ids != b->query_ids) note("query sets differ");
    for (std::size_t q = 0; q < std::min(a->ranked.size(), b->ranked.size()); ++q) {
      const auto& ra = a->ranked[q];
      const auto& rb = b->ranked[q];
      if (ra.size() != rb.size()) {
        note("query " + a->query_ids[q] + ": result counts differ");
        continue;
      }
      for (std::size_t i = 0; i < ra.size(); ++i) {
        if (ra[i].doc_id != rb[i].doc_id)
          note("query " + a->query_ids[q] + " rank " + std::to_string(i + 1) + ": " + ra[i].doc_id + " vs " +
               rb[i].doc_id);
        const double x = ra[i].score, y = rb[i].score;
        const double scale = std::max(std::abs(x), std::abs(y));
        const double rel = x == y ? 0.0 : std::abs(x - y) / scale;
        worst = std::max(worst, rel);
        if (rel > rel_tol)
          note("query " + a->query_ids[q] + " rank " + std::to_string(i + 1) + ": score differs");
      }
    }
    *equal = first.empty() ? 1 : 0;
    report["equal"] = first.empty();
    report["max_relative_error"] = worst;
    if (!first.empty()) report["first_difference"] = first;
    write_json(report_json, report);
  });
}

void lxr_results_free(lxr_results* results) { delete results; }

lxr_status lxr_evaluate(const char* run_path, const char* qrels_path, const char* options_json,
                        char** out_json) {
  return guarded([&] {
    require_arg(run_path, "run_path");
    require_arg(qrels_path, "qrels_path");
    require_arg(out_json, "out_json");
    Options o(options_json);
    lexroute::MetricOptions m;
    m.cutoff = o.get("cutoff", m.cutoff);
    const auto recall_cutoff = o.get<std::size_t>("recall_cutoff", 1000);
    m.relevance_threshold = o.get("threshold", m.relevance_threshold);
    const auto missing = o.get<std::string>("missing", "skip");
    o.finish();
    if (missing == "skip") {
      m.missing = lexroute::MissingQrels::kSkip;
    } else if (missing == "zero") {
      m.missing = lexroute::MissingQrels::kZero;
    } else {
      lexroute::fail(lexroute::ErrorCode::kInvalidArgument, "option 'missing' must be skip or zero");
    }
    const auto run = lexroute::read_run(run_path);
    const auto qrels = lexroute::read_qrels(qrels_path);
    std::size_t absent = 0;
    for (const auto& [qid, entries] : run) absent += qrels.count(qid) == 0;
    const auto metric = [](const lexroute::MetricResult& r) {
      return json{{"value", r.value}, {"evaluated", r.evaluated}, {"skipped", r.skipped}};
    };
    auto recall_options = m;
    recall_options.cutoff = recall_cutoff;
    write_json(out_json,
               json{{"mrr@" + std::to_string(m.cutoff), metric(lexroute::metric_mrr(run, qrels, m))},
                    {"ndcg@" + std::to_string(m.cutoff), metric(lexroute::metric_ndcg(run, qrels, m))},
                    {"recall@" + std::to_string(recall_cutoff),
                     metric(lexroute::metric_recall(run, qrels, recall_options))},
                    {"queries", run.size()},
                    {"queries_without_qrels", absent}});
  });
}

lxr_status lxr_bench(const lxr_index* index, const lxr_corpus* queries, const lxr_router* router,
                     const char* options_json, char** out_json) {
  return guarded([&] {
    require_arg(index, "index");
    require_arg(queries, "queries");
    require_arg(out_json, "out_json");
    Options o(options_json);
    const auto options = search_options(o, router);
    const auto trials = o.get<std::size_t>("trials", 5);
    o.finish();
    const auto report = lexroute::measure_latency(queries->sequences, index->index, options, trials);
    std::uint64_t dots = 0;
    for (const auto& q : queries->sequences) dots += lexroute::search(q, index->index, options).dot_products_used;
    write_json(out_json,
               json{{"queries", report.queries},
                    {"trials", report.trials},
                    {"best_trial_average", latency_json(report.best_average)},
                    {"trial_average_total_ns", report.trial_average_total_ns},
                    {"mean_over_trials_ns", report.mean_over_trials_ns},
                    {"dot_products_per_query",
                     static_cast<double>(dots) / static_cast<double>(queries->sequences.size())}});
  });
}

lxr_status lxr_loss_check(const char* options_json, char** out_json) {
  return guarded([&] {
    require_arg(out_json, "out_json");
    Options o(options_json);
    auto config = toy_config(o);
    const auto batch_size = o.get<std::size_t>("batch", 4);
    const auto step = o.get("step", 1e-5);
    o.finish();
    lexroute::require(batch_size >= 1, lexroute::ErrorCode::kInvalidArgument, "losscheck: batch must be >= 1");
    const auto problem = lexroute::make_toy_problem(config);
    lexroute::TrainingBatch batch;
    const std::size_t B = std::min(batch_size, problem.batch.queries.size());
    batch.queries.assign(problem.batch.queries.begin(), problem.batch.queries.begin() + B);
    batch.positives.assign(problem.batch.positives.begin(), problem.batch.positives.begin() + B);
    batch.negatives.assign(problem.batch.negatives.begin(), problem.batch.negatives.begin() + B);
    const auto router = lexroute::toy_initial_router(config);
    const auto loss = lexroute::total_loss(batch, router, config.weights, config.limits);
    const auto check = lexroute::check_router_gradients(batch, router, config.weights, config.limits, step);
    write_json(out_json, json{{"batch", B},
                              {"loss", loss_json(loss)},
                              {"max_relative_error", check.max_relative_error},
                              {"parameters", check.parameters},
                              {"kink_margin", check.kink_margin},
                              {"step", step}});
  });
}

lxr_status lxr_toy_train(const char* options_json, const char* trace_path, const char* router_path,
                         char** out_json) {
  return guarded([&] {
    Options o(options_json);
    const auto config = toy_config(o);
    o.finish();
    const auto result = lexroute::toy_train(config);
    if (trace_path) lexroute::write_trace_jsonl(result.trace, trace_path);
    if (router_path) lexroute::save_router(result.router.to_params(), router_path);
    const auto& first = result.trace.front();
    const auto& last = result.trace.back();
    write_json(out_json, json{{"steps", config.steps},
                              {"initial", {{"loss", loss_json(first.loss)}, {"balance", balance_json(first.balance)}}},
                              {"final", {{"loss", loss_json(last.loss)}, {"balance", balance_json(last.balance)}}}});
  });
}

}  // extern "C"
