/* Copyright 2026 The lexroute Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the lexroute retrieval engine.
 *
 * Every fallible call returns an lxr_status. On failure the thread-local
 * message returned by lxr_last_error() describes the problem. Handles are
 * opaque and owned by the caller; free them with the matching *_free
 * function. Strings returned through char** are freed with lxr_string_free.
 * Options and reports are JSON objects; unknown option keys are rejected.
 */

#ifndef LEXROUTE_LEXROUTE_H_
#define LEXROUTE_LEXROUTE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LXR_API __declspec(dllexport)
#else
#define LXR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lxr_status {
  LXR_OK = 0,
  LXR_ERR_INVALID_ARGUMENT = 1,
  LXR_ERR_DIMENSION_MISMATCH = 2,
  LXR_ERR_IO = 3,
  LXR_ERR_FORMAT = 4,
  LXR_ERR_NUMERIC = 5,
  LXR_ERR_STATE = 6,
  LXR_ERR_INTERNAL = 99
} lxr_status;

typedef struct lxr_router lxr_router;
typedef struct lxr_corpus lxr_corpus;
typedef struct lxr_index lxr_index;
typedef struct lxr_codebook lxr_codebook;
typedef struct lxr_results lxr_results;

LXR_API const char* lxr_last_error(void);
LXR_API const char* lxr_version(void);
LXR_API void lxr_string_free(char* s);

/* Router parameters (W, b). */
LXR_API lxr_status lxr_router_load(const char* path, lxr_router** out);
LXR_API lxr_status lxr_router_random(uint32_t dim, uint32_t key_count, uint64_t seed,
                                     float stddev, float bias, lxr_router** out);
LXR_API lxr_status lxr_router_save(const lxr_router* router, const char* path);
LXR_API lxr_status lxr_router_dims(const lxr_router* router, uint32_t* dim,
                                   uint32_t* key_count);
LXR_API void lxr_router_free(lxr_router* router);

/* Embedded sequences (documents or queries), JSONL or CTEM binary. */
LXR_API lxr_status lxr_corpus_load(const char* path, lxr_corpus** out);
LXR_API lxr_status lxr_corpus_save(const lxr_corpus* corpus, const char* path, int binary);
/* scheme: "single", "all_to_all", "static" or "dynamic"; router is required
 * for "dynamic" and ignored otherwise. */
LXR_API lxr_status lxr_corpus_route(lxr_corpus* corpus, const char* scheme,
                                    const lxr_router* router, uint32_t max_keys);
LXR_API size_t lxr_corpus_size(const lxr_corpus* corpus);
/* Token and sequence-vector dimensions (0 when absent). */
LXR_API lxr_status lxr_corpus_dims(const lxr_corpus* corpus, uint32_t* dim, uint32_t* cls_dim);
LXR_API void lxr_corpus_free(lxr_corpus* corpus);

/* Writes a seeded synthetic corpus, query set and qrels. config keys: docs,
 * tokens_per_doc, dim, vocab, cluster_count, skew, queries, query_tokens,
 * with_cls, noise, seed. */
LXR_API lxr_status lxr_generate(const char* config_json, const char* docs_path,
                                const char* queries_path, const char* qrels_path,
                                int binary);

/* options keys: tau, with_cls, key_count, scheme, threads. */
LXR_API lxr_status lxr_index_build(const lxr_corpus* docs, const char* options_json,
                                   lxr_index** out);
LXR_API lxr_status lxr_index_load(const char* path, lxr_index** out);
LXR_API lxr_status lxr_index_save(const lxr_index* index, const char* path);
LXR_API lxr_status lxr_index_prune(const lxr_index* index, float tau, lxr_index** out);
LXR_API lxr_status lxr_index_quantize(const lxr_index* index, const lxr_codebook* codebook,
                                      lxr_index** out);
/* docs may be NULL; when given, the activated-keys histogram is filled. */
LXR_API lxr_status lxr_index_stats(const lxr_index* index, const lxr_corpus* docs,
                                   char** out_json);
LXR_API uint64_t lxr_index_entries(const lxr_index* index);
LXR_API void lxr_index_free(lxr_index* index);

/* Trains on the posting vectors of a plain index. options keys: sub_dim, k,
 * iterations, seed, max_samples. report_json may be NULL. */
LXR_API lxr_status lxr_codebook_train(const lxr_index* index, const char* options_json,
                                      lxr_codebook** out, char** report_json);
LXR_API lxr_status lxr_codebook_load(const char* path, lxr_codebook** out);
LXR_API lxr_status lxr_codebook_save(const lxr_codebook* codebook, const char* path);
LXR_API void lxr_codebook_free(lxr_codebook* codebook);

/* Index search. options keys: top_k, with_cls, query_keys. When router is
 * non-NULL, query tokens are routed with it; otherwise their stored routes
 * are used. */
LXR_API lxr_status lxr_search(const lxr_index* index, const lxr_corpus* queries,
                              const lxr_router* router, const char* options_json,
                              lxr_results** out);
/* Exhaustive scoring. options keys: top_k, scheme, with_cls, tau,
 * reachable_only. Document routes at or below tau are ignored. */
LXR_API lxr_status lxr_brute_force(const lxr_corpus* docs, const lxr_corpus* queries,
                                   const char* options_json, lxr_results** out);
LXR_API size_t lxr_results_query_count(const lxr_results* results);
LXR_API lxr_status lxr_results_query(const lxr_results* results, size_t query,
                                     const char** query_id, size_t* count);
LXR_API lxr_status lxr_results_entry(const lxr_results* results, size_t query, size_t rank,
                                     const char** doc_id, float* score);
LXR_API uint64_t lxr_results_dot_products(const lxr_results* results);
LXR_API lxr_status lxr_results_write_run(const lxr_results* results, const char* path);
/* Sets *equal to 1 when both result sets hold the same ids in the same order
 * with scores within rel_tol. report_json (may be NULL) describes the first
 * difference. */
LXR_API lxr_status lxr_results_compare(const lxr_results* a, const lxr_results* b,
                                       double rel_tol, int* equal, char** report_json);
LXR_API void lxr_results_free(lxr_results* results);

/* options keys: cutoff, recall_cutoff, threshold, missing ("skip"|"zero"). */
LXR_API lxr_status lxr_evaluate(const char* run_path, const char* qrels_path,
                                const char* options_json, char** out_json);
/* options keys: top_k, with_cls, query_keys, trials. */
LXR_API lxr_status lxr_bench(const lxr_index* index, const lxr_corpus* queries,
                             const lxr_router* router, const char* options_json,
                             char** out_json);
/* Loss terms and a finite-difference check of the router gradients on the
 * toy problem. options: the toy_train keys plus batch, step. */
LXR_API lxr_status lxr_loss_check(const char* options_json, char** out_json);
/* Full-batch router training on a synthetic problem. trace_path and
 * router_path may be NULL. */
LXR_API lxr_status lxr_toy_train(const char* options_json, const char* trace_path,
                                 const char* router_path, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* LEXROUTE_LEXROUTE_H_ */
