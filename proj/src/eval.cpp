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

#include "lexroute/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "binary_io.hpp"
#include "lexroute/common.hpp"

namespace lexroute {
namespace {

// Walks run queries, resolving each against qrels under the missing policy.
// `score` returns nullopt when the query has nothing to evaluate.
template <typename ScoreFn>
MetricResult average_over_run(const RunFile& run, const Qrels& qrels,
                              const MetricOptions& options, ScoreFn score) {
  require(options.cutoff >= 1, ErrorCode::kInvalidArgument, "metric: cutoff must be >= 1");
  MetricResult result;
  double sum = 0.0;
  for (const auto& [qid, entries] : run) {
    const auto it = qrels.find(qid);
    if (it == qrels.end()) {
      if (options.missing == MissingQrels::kZero) {
        ++result.evaluated;
      } else {
        ++result.skipped;
      }
      continue;
    }
    const std::optional<double> value = score(entries, it->second);
    if (!value) {
      ++result.skipped;
      continue;
    }
    sum += *value;
    ++result.evaluated;
  }
  result.value = result.evaluated ? sum / static_cast<double>(result.evaluated) : 0.0;
  return result;
}

int grade_of(const std::map<std::string, int>& judged, const std::string& doc) {
  const auto it = judged.find(doc);
  return it == judged.end() ? 0 : it->second;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> fields;
  for (std::string f; in >> f;) fields.push_back(f);
  return fields;
}

}  // namespace

MetricResult metric_mrr(const RunFile& run, const Qrels& qrels,
                        MetricOptions options) {
  return average_over_run(run, qrels, options,
                          [&](const std::vector<RunEntry>& entries,
                              const std::map<std::string, int>& judged) -> std::optional<double> {
                            for (const auto& e : entries) {
                              if (e.rank > options.cutoff) break;
                              if (grade_of(judged, e.doc_id) >= options.relevance_threshold)
                                return 1.0 / static_cast<double>(e.rank);
                            }
                            return 0.0;
                          });
}

MetricResult metric_ndcg(const RunFile& run, const Qrels& qrels,
                         MetricOptions options) {
  return average_over_run(
      run, qrels, options,
      [&](const std::vector<RunEntry>& entries,
          const std::map<std::string, int>& judged) -> std::optional<double> {
        const auto gain = [](int g) { return std::exp2(static_cast<double>(g)) - 1.0; };
        const auto discount = [](std::size_t rank) {
          return std::log2(static_cast<double>(rank) + 1.0);
        };
        double dcg = 0.0;
        for (const auto& e : entries) {
          if (e.rank > options.cutoff) break;
          dcg += gain(grade_of(judged, e.doc_id)) / discount(e.rank);
        }
        std::vector<int> grades;
        for (const auto& [doc, g] : judged) grades.push_back(g);
        std::sort(grades.rbegin(), grades.rend());
        double ideal = 0.0;
        for (std::size_t i = 0; i < grades.size() && i < options.cutoff; ++i)
          ideal += gain(grades[i]) / discount(i + 1);
        if (ideal <= 0.0) return std::nullopt;
        return dcg / ideal;
      });
}

MetricResult metric_recall(const RunFile& run, const Qrels& qrels,
                           MetricOptions options) {
  return average_over_run(
      run, qrels, options,
      [&](const std::vector<RunEntry>& entries,
          const std::map<std::string, int>& judged) -> std::optional<double> {
        std::size_t relevant = 0;
        for (const auto& [doc, g] : judged)
          if (g >= options.relevance_threshold) ++relevant;
        if (relevant == 0) return std::nullopt;
        std::size_t found = 0;
        for (const auto& e : entries) {
          if (e.rank > options.cutoff) break;
          if (grade_of(judged, e.doc_id) >= options.relevance_threshold) ++found;
        }
        return static_cast<double>(found) / static_cast<double>(relevant);
      });
}

RunFile make_run(
    std::span<const std::pair<std::string, std::vector<RankedDoc>>> results) {
  RunFile run;
  for (const auto& [qid, ranked] : results) {
    auto& entries = run[qid];
    entries.clear();
    for (std::size_t i = 0; i < ranked.size(); ++i)
      entries.push_back({ranked[i].doc_id, i + 1, ranked[i].score});
  }
  return run;
}

RunFile read_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open run file " + path.string());
  RunFile run;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 4)
      fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(lineno) +
                                   ": expected 'query_id doc_id rank score'");
    try {
      const long rank = std::stol(f[2]);
      if (rank < 1) throw std::invalid_argument("rank");
      run[f[0]].push_back({f[1], static_cast<std::size_t>(rank), std::stod(f[3])});
    } catch (const std::logic_error&) {
      fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(lineno) + ": bad rank or score");
    }
  }
  for (auto& [qid, entries] : run) {
    std::sort(entries.begin(), entries.end(),
              [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].rank != i + 1)
        fail(ErrorCode::kFormat, "run file: ranks of query '" + qid + "' are not 1..n");
  }
  return run;
}

void write_run(const RunFile& run, const std::filesystem::path& path) {
  std::ostringstream out;
  out << std::setprecision(9);
  for (const auto& [qid, entries] : run)
    for (const auto& e : entries) out << qid << ' ' << e.doc_id << ' ' << e.rank << ' ' << e.score << '\n';
  const auto text = out.str();
  detail::atomic_write(path, {text.data(), text.size()});
}

Qrels read_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open qrels file " + path.string());
  Qrels qrels;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 3 && f.size() != 4)
      fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(lineno) +
                                   ": expected 'query_id doc_id grade'");
    const auto& doc = f.size() == 3 ? f[1] : f[2];
    try {
      const int grade = std::stoi(f.back());
      if (grade < 0) throw std::invalid_argument("grade");
      qrels[f[0]][doc] = grade;
    } catch (const std::logic_error&) {
      fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(lineno) + ": bad grade");
    }
  }
  return qrels;
}

void write_qrels(const Qrels& qrels, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& [qid, judged] : qrels)
    for (const auto& [doc, grade] : judged) out << qid << ' ' << doc << ' ' << grade << '\n';
  const auto text = out.str();
  detail::atomic_write(path, {text.data(), text.size()});
}

}  // namespace lexroute
