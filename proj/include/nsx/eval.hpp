// Copyright 2026 The NSX Authors.
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

// Ranked-retrieval effectiveness: TREC run and qrels files, and the MRR, MAP,
// precision, recall and nDCG measures.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsx/error.hpp"

namespace nsx::eval {

struct Judgment {
  std::string query_id;
  std::string doc_id;
  int grade = 0;

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

struct RunEntry {
  std::string query_id;
  std::string doc_id;
  std::size_t rank = 0;
  double score = 0;
  std::string run_tag;

  friend bool operator==(const RunEntry&, const RunEntry&) = default;
};

/// query_id -> entries sorted by rank.
using Run = std::map<std::string, std::vector<RunEntry>>;
/// query_id -> doc_id -> grade.
using Qrels = std::map<std::string, std::map<std::string, int>>;

/// `qid Q0 docid rank score tag`, whitespace separated. Validates that each
/// query has unique documents, ranks 1..n and non-increasing scores.
inline Run parse_run(std::istream& in) {
  Run run;
  std::map<std::string, std::set<std::string>> docs_seen;
  std::map<std::string, std::map<std::size_t, std::size_t>> rank_lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::vector<std::string> f;
    for (std::string tok; fields >> tok;) f.push_back(tok);
    if (f.empty()) continue;
    if (f.size() != 6) throw ParseError(lineno, "expected 6 fields in run line");
    RunEntry e;
    e.query_id = f[0];
    e.doc_id = f[2];
    e.run_tag = f[5];
    try {
      std::size_t used = 0;
      const long long rank = std::stoll(f[3], &used);
      if (used != f[3].size() || rank < 1) throw std::invalid_argument("rank");
      e.rank = static_cast<std::size_t>(rank);
      e.score = std::stod(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument("score");
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad rank or score");
    }
    if (!docs_seen[e.query_id].insert(e.doc_id).second)
      throw ParseError(lineno, "duplicate document " + e.doc_id + " for query " +
                                   e.query_id);
    if (!rank_lines[e.query_id].emplace(e.rank, lineno).second)
      throw ParseError(lineno, "duplicate rank " + std::to_string(e.rank) +
                                   " for query " + e.query_id);
    run[e.query_id].push_back(std::move(e));
  }
  for (auto& [qid, entries] : run) {
    std::sort(entries.begin(), entries.end(),
              [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].rank != i + 1)
        throw ParseError(rank_lines[qid].at(entries[i].rank),
                         "rank gap in query " + qid + ": expected rank " +
                             std::to_string(i + 1));
      if (i > 0 && entries[i].score > entries[i - 1].score)
        throw ParseError(rank_lines[qid].at(entries[i].rank),
                         "score increases with rank in query " + qid);
    }
  }
  return run;
}

/// `qid 0 docid grade`, whitespace separated.
inline Qrels parse_qrels(std::istream& in, int max_grade = 2) {
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::vector<std::string> f;
    for (std::string tok; fields >> tok;) f.push_back(tok);
    if (f.empty()) continue;
    if (f.size() != 4) throw ParseError(lineno, "expected 4 fields in qrels line");
    int grade = 0;
    try {
      std::size_t used = 0;
      grade = std::stoi(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("grade");
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad grade");
    }
    if (grade < 0 || grade > max_grade)
      throw ParseError(lineno, "grade " + f[3] + " outside [0," +
                                   std::to_string(max_grade) + "]");
    if (!qrels[f[0]].emplace(f[2], grade).second)
      throw ParseError(lineno, "duplicate judgment for (" + f[0] + ", " + f[2] + ")");
  }
  return qrels;
}

inline Run parse_run_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw InvalidArgument("cannot open run file " + p.string());
  return parse_run(in);
}

inline Qrels parse_qrels_file(const std::filesystem::path& p, int max_grade = 2) {
  std::ifstream in(p);
  if (!in) throw InvalidArgument("cannot open qrels file " + p.string());
  return parse_qrels(in, max_grade);
}

inline void write_run(std::ostream& out, const Run& run) {
  for (const auto& [qid, entries] : run)
    for (const auto& e : entries) {
      char score[64];
      std::snprintf(score, sizeof score, "%.6f", e.score);
      out << e.query_id << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << score
          << ' ' << e.run_tag << '\n';
    }
}

inline void write_qrels(std::ostream& out, const Qrels& qrels) {
  for (const auto& [qid, docs] : qrels)
    for (const auto& [doc, grade] : docs)
      out << qid << " 0 " << doc << ' ' << grade << '\n';
}

enum class MetricKind { kMrr, kNdcg, kMap, kPrecision, kRecall };

struct Metric {
  MetricKind kind = MetricKind::kMrr;
  std::optional<std::size_t> cutoff;  // none: whole ranking

  std::string name() const {
    std::string base;
    switch (kind) {
      case MetricKind::kMrr: base = "mrr"; break;
      case MetricKind::kNdcg: base = "ndcg"; break;
      case MetricKind::kMap: base = "map"; break;
      case MetricKind::kPrecision: base = "p"; break;
      case MetricKind::kRecall: base = "r"; break;
    }
    return cutoff ? base + "@" + std::to_string(*cutoff) : base;
  }

  /// Accepts mrr[@k], ndcg[@k], map[@k], p@k, r@k (case-insensitive).
  static Metric parse(std::string_view spec) {
    std::string s(spec);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    Metric m;
    const auto at = s.find('@');
    const std::string base = s.substr(0, at);
    if (at != std::string::npos) {
      const auto digits = s.substr(at + 1);
      if (digits.empty() ||
          !std::all_of(digits.begin(), digits.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw InvalidArgument("bad metric cutoff: " + std::string(spec));
      m.cutoff = std::stoul(digits);
      if (*m.cutoff == 0) throw InvalidArgument("metric cutoff must be >= 1");
    }
    if (base == "mrr" || base == "recip_rank") m.kind = MetricKind::kMrr;
    else if (base == "ndcg") m.kind = MetricKind::kNdcg;
    else if (base == "map") m.kind = MetricKind::kMap;
    else if (base == "p" || base == "precision") m.kind = MetricKind::kPrecision;
    else if (base == "r" || base == "recall") m.kind = MetricKind::kRecall;
    else throw InvalidArgument("unknown metric: " + std::string(spec));
    if ((m.kind == MetricKind::kPrecision || m.kind == MetricKind::kRecall) &&
        !m.cutoff)
      throw InvalidArgument("metric needs a cutoff: " + std::string(spec));
    return m;
  }

  static std::vector<Metric> parse_list(std::string_view csv) {
    std::vector<Metric> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
      auto comma = csv.find(',', start);
      if (comma == std::string_view::npos) comma = csv.size();
      auto item = csv.substr(start, comma - start);
      if (!item.empty()) out.push_back(parse(item));
      start = comma + 1;
    }
    if (out.empty()) throw InvalidArgument("no metrics requested");
    return out;
  }
};

enum class Gain { kLinear, kExponential };

struct EvalOptions {
  int relevance_threshold = 1;  // binary metrics: relevant iff grade >= this
  Gain gain = Gain::kLinear;
};

struct MetricReport {
  std::vector<std::string> metrics;  // column order
  std::map<std::string, std::map<std::string, double>> per_query;
  std::map<std::string, double> mean;
  std::size_t query_count = 0;

  nlohmann::json to_json() const {
    return {{"metrics", metrics},
            {"queries", query_count},
            {"mean", mean},
            {"per_query", per_query}};
  }

  /// One `metric <tab> all <tab> value` line per metric.
  std::string to_table() const {
    std::string out;
    for (const auto& m : metrics) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%-10s\tall\t%.4f\n", m.c_str(), mean.at(m));
      out += buf;
    }
    return out;
  }
};

namespace detail {

inline double gain_of(int grade, Gain g) {
  if (grade <= 0) return 0.0;
  return g == Gain::kLinear ? static_cast<double>(grade)
                            : std::exp2(static_cast<double>(grade)) - 1.0;
}

inline double discount(std::size_t rank) {
  return std::log2(static_cast<double>(rank) + 1.0);
}

}  // namespace detail

/// Value of one metric for one query. `grades` lists the judged grade of each
/// retrieved document in rank order (unjudged documents are 0); `judged`
/// holds every grade in the qrels for this query.
inline double metric_value(const Metric& m, const std::vector<int>& grades,
                           const std::vector<int>& judged,
                           const EvalOptions& opts) {
  const std::size_t depth =
      m.cutoff ? std::min(*m.cutoff, grades.size()) : grades.size();
  auto relevant = [&](int g) { return g >= opts.relevance_threshold; };
  const auto total_relevant = static_cast<std::size_t>(
      std::count_if(judged.begin(), judged.end(), relevant));

  switch (m.kind) {
    case MetricKind::kMrr:
      for (std::size_t i = 0; i < depth; ++i)
        if (relevant(grades[i])) return 1.0 / static_cast<double>(i + 1);
      return 0.0;
    case MetricKind::kPrecision: {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < depth; ++i) hits += relevant(grades[i]);
      return static_cast<double>(hits) / static_cast<double>(*m.cutoff);
    }
    case MetricKind::kRecall: {
      if (total_relevant == 0) return 0.0;
      std::size_t hits = 0;
      for (std::size_t i = 0; i < depth; ++i) hits += relevant(grades[i]);
      return static_cast<double>(hits) / static_cast<double>(total_relevant);
    }
    case MetricKind::kMap: {
      if (total_relevant == 0) return 0.0;
      std::size_t hits = 0;
      double sum = 0.0;
      for (std::size_t i = 0; i < depth; ++i) {
        if (!relevant(grades[i])) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
      }
      return sum / static_cast<double>(total_relevant);
    }
    case MetricKind::kNdcg: {
      double dcg = 0.0;
      for (std::size_t i = 0; i < depth; ++i)
        dcg += detail::gain_of(grades[i], opts.gain) / detail::discount(i + 1);
      std::vector<int> ideal = judged;
      std::sort(ideal.begin(), ideal.end(), std::greater<>());
      const std::size_t ideal_depth =
          m.cutoff ? std::min(*m.cutoff, ideal.size()) : ideal.size();
      double idcg = 0.0;
      for (std::size_t i = 0; i < ideal_depth; ++i)
        idcg += detail::gain_of(ideal[i], opts.gain) / detail::discount(i + 1);
      return idcg > 0 ? dcg / idcg : 0.0;
    }
  }
  return 0.0;
}

/// Evaluates every query that appears in the run or in the qrels; a query
/// missing from one side scores 0.
inline MetricReport evaluate(const Run& run, const Qrels& qrels,
                             const std::vector<Metric>& metrics,
                             const EvalOptions& opts = {}) {
  MetricReport report;
  for (const auto& m : metrics) report.metrics.push_back(m.name());
  std::set<std::string> queries;
  for (const auto& [qid, _] : run) queries.insert(qid);
  for (const auto& [qid, _] : qrels) queries.insert(qid);

  for (const auto& name : report.metrics) report.mean[name] = 0.0;
  for (const auto& qid : queries) {
    std::vector<int> grades;
    std::vector<int> judged;
    const auto q_it = qrels.find(qid);
    if (q_it != qrels.end())
      for (const auto& [_, g] : q_it->second) judged.push_back(g);
    if (auto r_it = run.find(qid); r_it != run.end()) {
      for (const auto& e : r_it->second) {
        int g = 0;
        if (q_it != qrels.end())
          if (auto d = q_it->second.find(e.doc_id); d != q_it->second.end())
            g = d->second;
        grades.push_back(g);
      }
    }
    auto& row = report.per_query[qid];
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      const double v = metric_value(metrics[i], grades, judged, opts);
      row[report.metrics[i]] = v;
      report.mean[report.metrics[i]] += v;
    }
  }
  report.query_count = queries.size();
  if (!queries.empty())
    for (auto& [_, v] : report.mean) v /= static_cast<double>(queries.size());
  return report;
}

}  // namespace nsx::eval
