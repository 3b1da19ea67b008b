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

// lexroute command-line interface. Every subcommand goes through the C API.
//
// A JSON config file (--config PATH, a flat object keyed by long option
// names) is expanded in front of the command-line arguments; options take
// their last value, so explicit flags win.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lexroute/lexroute.h"

namespace {

using nlohmann::json;

struct CliFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(lxr_status status) {
  if (status != LXR_OK) throw CliFailure(lxr_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Router = std::unique_ptr<lxr_router, Deleter<lxr_router, lxr_router_free>>;
using Corpus = std::unique_ptr<lxr_corpus, Deleter<lxr_corpus, lxr_corpus_free>>;
using Index = std::unique_ptr<lxr_index, Deleter<lxr_index, lxr_index_free>>;
using Codebook = std::unique_ptr<lxr_codebook, Deleter<lxr_codebook, lxr_codebook_free>>;
using Results = std::unique_ptr<lxr_results, Deleter<lxr_results, lxr_results_free>>;

json take_json(char* s) {
  std::unique_ptr<char, Deleter<char, lxr_string_free>> owned(s);
  return json::parse(owned.get());
}

Corpus load_corpus(const std::string& path) {
  lxr_corpus* c = nullptr;
  check(lxr_corpus_load(path.c_str(), &c));
  return Corpus(c);
}

Index load_index(const std::string& path) {
  lxr_index* i = nullptr;
  check(lxr_index_load(path.c_str(), &i));
  return Index(i);
}

Router load_router(const std::string& path) {
  lxr_router* r = nullptr;
  check(lxr_router_load(path.c_str(), &r));
  return Router(r);
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) throw CliFailure("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw CliFailure("cannot rename " + tmp.string() + ": " + ec.message());
}

void emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!path.empty()) write_text_atomic(path, text);
}

// Expands `--config PATH` into `--key value` pairs inserted right after the
// subcommand name.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::optional<std::string> config;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config) return rest;
  std::ifstream in(*config);
  if (!in) throw CliFailure("cannot open config file " + *config);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw CliFailure("config file " + *config + ": " + e.what());
  }
  if (!j.is_object()) throw CliFailure("config file must hold a JSON object");
  std::vector<std::string> injected;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back(flag);
    } else if (value.is_string()) {
      injected.push_back(flag);
      injected.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      injected.push_back(flag);
      injected.push_back(value.dump());
    } else {
      throw CliFailure("config key '" + key + "' must be a string, number or boolean");
    }
  }
  const std::size_t at = rest.size() >= 2 ? 2 : rest.size();
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
  return rest;
}

struct SyntheticFlags {
  std::size_t docs = 100, tokens_per_doc = 30, dim = 8, vocab = 50, clusters = 8;
  std::size_t queries = 20, query_tokens = 6;
  double skew = 1.0, noise = 0.3;
  bool with_cls = false;
  std::uint64_t seed = 7;

  void attach(CLI::App* app) {
    app->add_option("--docs", docs, "number of documents")->capture_default_str();
    app->add_option("--tokens-per-doc", tokens_per_doc, "tokens per document")->capture_default_str();
    app->add_option("--dim", dim, "token vector dimension")->capture_default_str();
    app->add_option("--vocab", vocab, "token-id vocabulary size")->capture_default_str();
    app->add_option("--clusters", clusters, "Gaussian cluster count")->capture_default_str();
    app->add_option("--skew", skew, "Zipf exponent of token ids")->capture_default_str();
    app->add_option("--queries", queries, "number of queries")->capture_default_str();
    app->add_option("--query-tokens", query_tokens, "tokens per query")->capture_default_str();
    app->add_option("--noise", noise, "token noise scale")->capture_default_str();
    app->add_flag("--with-cls", with_cls, "emit sequence vectors");
    app->add_option("--seed", seed, "random seed")->capture_default_str();
  }

  json to_json() const {
    return {{"docs", docs},       {"tokens_per_doc", tokens_per_doc}, {"dim", dim},
            {"vocab", vocab},     {"cluster_count", clusters},        {"skew", skew},
            {"queries", queries}, {"query_tokens", query_tokens},     {"noise", noise},
            {"with_cls", with_cls}, {"seed", seed}};
  }
};

struct ToyFlags {
  std::size_t key_count = 16, negatives = 3, steps = 200, query_keys = 1, doc_keys = 5;
  double learning_rate = 0.05, alpha = 1e-2, beta = 1e-5, init_stddev = 0.5, init_bias = -2.0;
  std::size_t docs = 48, tokens_per_doc = 8, dim = 8, vocab = 64, queries = 24, query_tokens = 4;
  std::uint64_t seed = 1;

  void attach(CLI::App* app) {
    app->add_option("--keys", key_count, "router key count")->capture_default_str();
    app->add_option("--negatives", negatives, "negatives per query")->capture_default_str();
    app->add_option("--steps", steps, "gradient steps")->capture_default_str();
    app->add_option("--lr", learning_rate, "learning rate")->capture_default_str();
    app->add_option("--alpha", alpha, "load-balance weight")->capture_default_str();
    app->add_option("--beta", beta, "sparsity weight")->capture_default_str();
    app->add_option("--query-keys", query_keys, "keys kept per query token")->capture_default_str();
    app->add_option("--doc-keys", doc_keys, "keys kept per document token")->capture_default_str();
    app->add_option("--init-stddev", init_stddev, "router weight init scale")->capture_default_str();
    app->add_option("--init-bias", init_bias, "router bias init")->capture_default_str();
    app->add_option("--docs", docs, "synthetic documents")->capture_default_str();
    app->add_option("--tokens-per-doc", tokens_per_doc, "tokens per document")->capture_default_str();
    app->add_option("--dim", dim, "token vector dimension")->capture_default_str();
    app->add_option("--vocab", vocab, "token-id vocabulary size")->capture_default_str();
    app->add_option("--queries", queries, "synthetic queries (batch size)")->capture_default_str();
    app->add_option("--query-tokens", query_tokens, "tokens per query")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
  }

  json to_json() const {
    return {{"key_count", key_count}, {"negatives", negatives}, {"steps", steps},
            {"learning_rate", learning_rate}, {"alpha", alpha}, {"beta", beta},
            {"query_keys", query_keys}, {"doc_keys", doc_keys}, {"init_stddev", init_stddev},
            {"init_bias", init_bias}, {"docs", docs}, {"tokens_per_doc", tokens_per_doc},
            {"dim", dim}, {"vocab", vocab}, {"queries", queries}, {"query_tokens", query_tokens},
            {"seed", seed}};
  }
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const CliFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"lexroute: dynamic lexical routing retrieval engine"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lxr_version()));
  app.add_option("--config", "JSON file of default option values (flags win)");

  // generate
  auto* gen = app.add_subcommand("generate", "write a seeded synthetic corpus, queries and qrels");
  SyntheticFlags gen_flags;
  gen_flags.attach(gen);
  std::string gen_docs, gen_queries, gen_qrels;
  bool gen_binary = false;
  gen->add_option("--out-docs", gen_docs, "document embeddings output")->required();
  gen->add_option("--out-queries", gen_queries, "query embeddings output");
  gen->add_option("--out-qrels", gen_qrels, "qrels output");
  gen->add_flag("--binary", gen_binary, "write the CTEM binary format");

  // route
  auto* route = app.add_subcommand("route", "assign routes to every token of an embedding file");
  std::string route_in, route_out, route_scheme = "dynamic", route_router, route_save_router;
  std::uint32_t route_max_keys = 5, route_keys = 0;
  std::uint64_t route_seed = 1;
  float route_stddev = 1.0f, route_bias = 0.0f;
  bool route_binary = false;
  route->add_option("--input", route_in, "embedding file")->required();
  route->add_option("--output", route_out, "routed embedding file")->required();
  route->add_option("--scheme", route_scheme, "single | all_to_all | static | dynamic")->capture_default_str();
  route->add_option("--router", route_router, "router parameter file (LXRT)");
  route->add_option("--random-keys", route_keys, "use a seeded random router with this many keys");
  route->add_option("--router-seed", route_seed, "seed of the random router")->capture_default_str();
  route->add_option("--router-stddev", route_stddev, "weight scale of the random router")->capture_default_str();
  route->add_option("--router-bias", route_bias, "bias of the random router")->capture_default_str();
  route->add_option("--save-router", route_save_router, "write the router used");
  route->add_option("--max-keys", route_max_keys, "keys kept per token")->capture_default_str();
  route->add_flag("--binary", route_binary, "write the CTEM binary format");

  // index
  auto* index = app.add_subcommand("index", "build an inverted index from routed documents");
  std::string index_docs, index_out, index_scheme = "dynamic";
  float index_tau = 0.0f;
  bool index_cls = false;
  std::uint32_t index_keys = 0;
  std::size_t index_threads = 0;
  index->add_option("--docs", index_docs, "routed document embeddings")->required();
  index->add_option("--output", index_out, "index file")->required();
  index->add_option("--tau", index_tau, "keep routes with weight > tau")->capture_default_str();
  index->add_flag("--with-cls", index_cls, "store sequence vectors");
  index->add_option("--key-count", index_keys, "number of keys (0: infer)")->capture_default_str();
  index->add_option("--scheme", index_scheme, "scheme recorded in the header")->capture_default_str();
  index->add_option("--threads", index_threads, "build threads (0: auto)")->capture_default_str();

  // prune
  auto* prune = app.add_subcommand("prune", "raise the pruning threshold of an index");
  std::string prune_in, prune_out;
  float prune_tau = 0.0f;
  prune->add_option("--index", prune_in, "input index")->required();
  prune->add_option("--tau", prune_tau, "new threshold")->required();
  prune->add_option("--output", prune_out, "output index")->required();

  // quantize
  auto* quant = app.add_subcommand("quantize", "product-quantize the posting vectors of an index");
  std::string quant_in, quant_out, quant_cb_out, quant_cb_in;
  std::uint32_t quant_sub_dim = 4, quant_k = 256, quant_iters = 25;
  std::uint64_t quant_seed = 1234;
  std::size_t quant_samples = 100000;
  quant->add_option("--index", quant_in, "plain index")->required();
  quant->add_option("--output", quant_out, "quantized index")->required();
  quant->add_option("--codebook", quant_cb_in, "use this codebook instead of training one");
  quant->add_option("--codebook-out", quant_cb_out, "write the trained codebook");
  quant->add_option("--sub-dim", quant_sub_dim, "subspace dimension m")->capture_default_str();
  quant->add_option("--k", quant_k, "centroids per subspace")->capture_default_str();
  quant->add_option("--iterations", quant_iters, "Lloyd iterations")->capture_default_str();
  quant->add_option("--seed", quant_seed, "training seed")->capture_default_str();
  quant->add_option("--max-samples", quant_samples, "training sample cap")->capture_default_str();

  // search
  auto* search = app.add_subcommand("search", "rank documents for every query");
  std::string search_index, search_queries, search_run, search_router, search_docs;
  std::size_t search_top_k = 10, search_query_keys = 1;
  bool search_cls = false, search_oracle = false;
  double search_tol = 1e-5;
  search->add_option("--index", search_index, "index file")->required();
  search->add_option("--queries", search_queries, "routed query embeddings")->required();
  search->add_option("--run", search_run, "run file output");
  search->add_option("--top-k", search_top_k, "results per query")->capture_default_str();
  search->add_flag("--with-cls", search_cls, "add the sequence-vector score");
  search->add_option("--router", search_router, "route queries with this router");
  search->add_option("--query-keys", search_query_keys, "keys per query token with --router")->capture_default_str();
  search->add_flag("--oracle-check", search_oracle, "compare with exhaustive scoring over --docs");
  search->add_option("--docs", search_docs, "routed document embeddings for --oracle-check");
  search->add_option("--tolerance", search_tol, "relative score tolerance of --oracle-check")->capture_default_str();
  search->add_option("--scheme", "accepted for symmetry with index; must be dynamic")
      ->check(CLI::IsMember({"dynamic"}));

  // eval
  auto* eval = app.add_subcommand("eval", "compute MRR, nDCG and recall of a run");
  std::string eval_run, eval_qrels, eval_missing = "skip", eval_out;
  std::size_t eval_cutoff = 10, eval_recall = 1000;
  int eval_threshold = 1;
  eval->add_option("--run", eval_run, "run file")->required();
  eval->add_option("--qrels", eval_qrels, "qrels file")->required();
  eval->add_option("--cutoff", eval_cutoff, "MRR / nDCG cutoff")->capture_default_str();
  eval->add_option("--recall-cutoff", eval_recall, "recall cutoff")->capture_default_str();
  eval->add_option("--threshold", eval_threshold, "minimum relevant grade")->capture_default_str();
  eval->add_option("--missing", eval_missing, "queries without qrels: skip | zero")
      ->check(CLI::IsMember({"skip", "zero"}))
      ->capture_default_str();
  eval->add_option("--output", eval_out, "also write the report here");

  // stats
  auto* stats = app.add_subcommand("stats", "report posting-list statistics");
  std::string stats_index, stats_docs, stats_out;
  stats->add_option("--index", stats_index, "index file")->required();
  stats->add_option("--docs", stats_docs, "routed documents, for the activated-keys histogram");
  stats->add_option("--output", stats_out, "also write the report here");

  // bench
  auto* bench = app.add_subcommand("bench", "measure per-stage search latency");
  std::string bench_index, bench_queries, bench_router, bench_out;
  std::size_t bench_top_k = 10, bench_trials = 5, bench_query_keys = 1;
  bool bench_cls = false;
  bench->add_option("--index", bench_index, "index file")->required();
  bench->add_option("--queries", bench_queries, "routed query embeddings")->required();
  bench->add_option("--router", bench_router, "route queries with this router");
  bench->add_option("--query-keys", bench_query_keys, "keys per query token with --router")->capture_default_str();
  bench->add_option("--top-k", bench_top_k, "results per query")->capture_default_str();
  bench->add_option("--trials", bench_trials, "timed passes over the query set")->capture_default_str();
  bench->add_flag("--with-cls", bench_cls, "add the sequence-vector score");
  bench->add_option("--output", bench_out, "also write the report here");

  // losscheck
  auto* loss = app.add_subcommand("losscheck", "loss terms and a router-gradient check on a toy batch");
  ToyFlags loss_flags;
  loss_flags.attach(loss);
  std::size_t loss_batch = 4;
  double loss_step = 1e-5, loss_tol = 1e-4;
  loss->add_option("--batch", loss_batch, "queries in the batch")->capture_default_str();
  loss->add_option("--step", loss_step, "finite-difference step")->capture_default_str();
  loss->add_option("--tolerance", loss_tol, "maximum relative gradient error")->capture_default_str();

  // toytrain
  auto* toy = app.add_subcommand("toytrain", "train a linear router on a synthetic problem");
  ToyFlags toy_flags;
  toy_flags.attach(toy);
  std::string toy_trace, toy_router_out, toy_out;
  toy->add_option("--trace", toy_trace, "JSON Lines training trace");
  toy->add_option("--router-out", toy_router_out, "trained router file");
  toy->add_option("--output", toy_out, "also write the summary here");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      check(lxr_generate(gen_flags.to_json().dump().c_str(), gen_docs.c_str(),
                         gen_queries.empty() ? nullptr : gen_queries.c_str(),
                         gen_qrels.empty() ? nullptr : gen_qrels.c_str(), gen_binary ? 1 : 0));
    } else if (*route) {
      auto corpus = load_corpus(route_in);
      Router router;
      if (!route_router.empty()) {
        router = load_router(route_router);
      } else if (route_keys > 0) {
        lxr_router* r = nullptr;
        uint32_t dim = 0;
        check(lxr_corpus_dims(corpus.get(), &dim, nullptr));
        check(lxr_router_random(dim, route_keys, route_seed, route_stddev, route_bias, &r));
        router.reset(r);
      }
      check(lxr_corpus_route(corpus.get(), route_scheme.c_str(), router.get(), route_max_keys));
      if (!route_save_router.empty()) {
        if (!router) throw CliFailure("--save-router needs --router or --random-keys");
        check(lxr_router_save(router.get(), route_save_router.c_str()));
      }
      check(lxr_corpus_save(corpus.get(), route_out.c_str(), route_binary ? 1 : 0));
    } else if (*index) {
      auto corpus = load_corpus(index_docs);
      const json options{{"tau", index_tau}, {"with_cls", index_cls}, {"key_count", index_keys},
                         {"scheme", index_scheme}, {"threads", index_threads}};
      lxr_index* idx = nullptr;
      check(lxr_index_build(corpus.get(), options.dump().c_str(), &idx));
      Index owned(idx);
      check(lxr_index_save(owned.get(), index_out.c_str()));
      std::cerr << "indexed " << lxr_corpus_size(corpus.get()) << " documents, "
                << lxr_index_entries(owned.get()) << " entries\n";
    } else if (*prune) {
      auto in = load_index(prune_in);
      lxr_index* out = nullptr;
      check(lxr_index_prune(in.get(), prune_tau, &out));
      Index owned(out);
      check(lxr_index_save(owned.get(), prune_out.c_str()));
      std::cerr << "entries " << lxr_index_entries(in.get()) << " -> " << lxr_index_entries(owned.get()) << "\n";
    } else if (*quant) {
      auto in = load_index(quant_in);
      Codebook codebook;
      lxr_codebook* cb = nullptr;
      if (!quant_cb_in.empty()) {
        check(lxr_codebook_load(quant_cb_in.c_str(), &cb));
        codebook.reset(cb);
      } else {
        const json options{{"sub_dim", quant_sub_dim}, {"k", quant_k}, {"iterations", quant_iters},
                           {"seed", quant_seed}, {"max_samples", quant_samples}};
        char* report = nullptr;
        check(lxr_codebook_train(in.get(), options.dump().c_str(), &cb, &report));
        codebook.reset(cb);
        std::cout << take_json(report).dump(2) << "\n";
      }
      if (!quant_cb_out.empty()) check(lxr_codebook_save(codebook.get(), quant_cb_out.c_str()));
      lxr_index* out = nullptr;
      check(lxr_index_quantize(in.get(), codebook.get(), &out));
      Index owned(out);
      check(lxr_index_save(owned.get(), quant_out.c_str()));
    } else if (*search) {
      auto idx = load_index(search_index);
      auto queries = load_corpus(search_queries);
      Router router;
      if (!search_router.empty()) router = load_router(search_router);
      const json options{{"top_k", search_top_k}, {"with_cls", search_cls}, {"query_keys", search_query_keys}};
      lxr_results* res = nullptr;
      check(lxr_search(idx.get(), queries.get(), router.get(), options.dump().c_str(), &res));
      Results results(res);
      if (!search_run.empty()) check(lxr_results_write_run(results.get(), search_run.c_str()));
      std::cerr << "searched " << lxr_results_query_count(results.get()) << " queries, "
                << lxr_results_dot_products(results.get()) << " dot products\n";
      if (search_oracle) {
        if (search_docs.empty()) throw CliFailure("--oracle-check needs --docs");
        if (router) throw CliFailure("--oracle-check compares stored query routes; drop --router");
        char* stats_json = nullptr;
        check(lxr_index_stats(idx.get(), nullptr, &stats_json));
        const auto meta = take_json(stats_json);
        auto docs = load_corpus(search_docs);
        const json bf{{"top_k", search_top_k}, {"scheme", "dynamic"}, {"with_cls", search_cls},
                      {"tau", meta["tau"]}, {"reachable_only", !search_cls}};
        lxr_results* oracle = nullptr;
        check(lxr_brute_force(docs.get(), queries.get(), bf.dump().c_str(), &oracle));
        Results expected(oracle);
        int equal = 0;
        char* report = nullptr;
        check(lxr_results_compare(results.get(), expected.get(), search_tol, &equal, &report));
        const auto r = take_json(report);
        std::cout << r.dump(2) << "\n";
        if (!equal) throw CliFailure("oracle check failed: " + r.value("first_difference", std::string()));
      }
    } else if (*eval) {
      const json options{{"cutoff", eval_cutoff}, {"recall_cutoff", eval_recall},
                         {"threshold", eval_threshold}, {"missing", eval_missing}};
      char* report = nullptr;
      check(lxr_evaluate(eval_run.c_str(), eval_qrels.c_str(), options.dump().c_str(), &report));
      const auto r = take_json(report);
      const auto absent = r["queries_without_qrels"].get<std::size_t>();
      if (absent > 0)
        std::cerr << "warning: " << absent << " run queries have no qrels ("
                  << (eval_missing == "skip" ? "skipped" : "scored as zero") << ")\n";
      emit(r, eval_out);
    } else if (*stats) {
      auto idx = load_index(stats_index);
      Corpus docs;
      if (!stats_docs.empty()) docs = load_corpus(stats_docs);
      char* report = nullptr;
      check(lxr_index_stats(idx.get(), docs.get(), &report));
      emit(take_json(report), stats_out);
    } else if (*bench) {
      auto idx = load_index(bench_index);
      auto queries = load_corpus(bench_queries);
      Router router;
      if (!bench_router.empty()) router = load_router(bench_router);
      const json options{{"top_k", bench_top_k}, {"with_cls", bench_cls}, {"trials", bench_trials},
                         {"query_keys", bench_query_keys}};
      char* report = nullptr;
      check(lxr_bench(idx.get(), queries.get(), router.get(), options.dump().c_str(), &report));
      emit(take_json(report), bench_out);
    } else if (*loss) {
      auto options = loss_flags.to_json();
      options["batch"] = loss_batch;
      options["step"] = loss_step;
      char* report = nullptr;
      check(lxr_loss_check(options.dump().c_str(), &report));
      const auto r = take_json(report);
      std::cout << r.dump(2) << "\n";
      if (r["kink_margin"].get<double>() < 100.0 * loss_step)
        std::cerr << "warning: the batch sits within " << r["kink_margin"].get<double>()
                  << " of a non-smooth point; the finite-difference check may be unreliable\n";
      if (!(r["max_relative_error"].get<double>() < loss_tol))
        throw CliFailure("gradient check failed: max relative error " + r["max_relative_error"].dump());
    } else if (*toy) {
      char* report = nullptr;
      check(lxr_toy_train(toy_flags.to_json().dump().c_str(), toy_trace.empty() ? nullptr : toy_trace.c_str(),
                          toy_router_out.empty() ? nullptr : toy_router_out.c_str(), &report));
      emit(take_json(report), toy_out);
    }
  } catch (const CliFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
