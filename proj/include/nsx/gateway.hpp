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

// The search service: retrieve -> merge and rank -> highlight, plus named
// engine configurations used by the annotation sessions.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsx/annotation.hpp"
#include "nsx/config.hpp"
#include "nsx/highlight.hpp"
#include "nsx/index.hpp"
#include "nsx/rank.hpp"
#include "nsx/retrieval.hpp"
#include "nsx/scorer.hpp"
#include "nsx/scoring_pool.hpp"
#include "nsx/shard.hpp"

namespace nsx {

struct SearchResult {
  std::string doc_id;
  std::string title;
  std::string url;
  std::string display_text;
  std::string source;
  std::size_t rank = 0;
  double score = 0;
  bool highlighted = false;
};

struct StageTimings {
  double retrieval_ms = 0;
  double rerank_ms = 0;
  double highlight_ms = 0;
  double total_ms = 0;
};

struct SearchResponse {
  std::string query_id;
  std::string query;
  std::string engine;
  std::vector<SearchResult> results;
  StageTimings timings;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const {
    nlohmann::json res = nlohmann::json::array();
    for (const auto& r : results)
      res.push_back({{"doc_id", r.doc_id},
                     {"title", r.title},
                     {"url", r.url},
                     {"display_text", r.display_text},
                     {"source", r.source},
                     {"rank", r.rank},
                     {"score", r.score},
                     {"highlighted", r.highlighted}});
    return {{"query_id", query_id},
            {"query", query},
            {"engine", engine},
            {"results", res},
            {"timings_ms",
             {{"retrieval", timings.retrieval_ms},
              {"rerank", timings.rerank_ms},
              {"highlight", timings.highlight_ms},
              {"total", timings.total_ms}}},
            {"warnings", warnings}};
  }
};

struct SearchParams {
  std::optional<std::size_t> k;
  std::optional<std::string> engine;
};

/// Stable query id: "q" + 64-bit FNV-1a of the query text.
inline std::string query_id_for(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "q%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Snippets are shown verbatim, highlighted documents as their highlights,
/// anything else as its opening words.
inline std::string display_text_for(const RankedEntry& e, std::size_t max_words = 60) {
  if (e.document.is_snippet) return e.document.text;
  if (!e.highlights.empty()) {
    std::string out;
    for (const auto& s : e.highlights) {
      if (!out.empty()) out += " ... ";
      out += s.text;
    }
    return out;
  }
  const auto words = split_whitespace(e.document.text);
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < max_words; ++i) {
    if (i > 0) out.push_back(' ');
    out.append(words[i]);
  }
  if (words.size() > max_words) out += " ...";
  return out.empty() ? e.document.doc_id : out;
}

class Gateway {
 public:
  struct NamedSource {
    std::string name;
    std::shared_ptr<const CandidateSource> source;
    bool local = false;
  };

  /// Loads indexes and connects sources as described by `cfg`.
  explicit Gateway(ServiceConfig cfg) : Gateway(cfg, build_sources(cfg), nullptr) {}

  /// Uses the given sources (priority order) and scorer. A null scorer is
  /// built from the config.
  Gateway(ServiceConfig cfg, std::vector<NamedSource> sources,
          std::shared_ptr<const Scorer> scorer)
      : cfg_(std::move(cfg)), sources_(std::move(sources)) {
    if (sources_.empty()) throw InvalidArgument("gateway needs at least one source");
    if (cfg_.engines.empty()) cfg_.engines[cfg_.default_engine] = EngineSpec{};
    for (const auto& [name, engine] : cfg_.engines)
      for (const auto& src : engine.sources)
        if (find_source(src) == nullptr)
          throw InvalidArgument("engine " + name + " uses unknown source " + src);
    scorer_ = scorer ? std::move(scorer) : build_scorer(cfg_);
    AnnotationService::Options opts;
    opts.store = cfg_.judgment_store;
    opts.default_max_grade = cfg_.max_grade;
    annotations_ = std::make_unique<AnnotationService>(
        [this](const std::string& engine, const std::string& query, std::size_t k) {
          return engine_list(engine, query, k);
        },
        std::move(opts));
  }

  const ServiceConfig& config() const noexcept { return cfg_; }
  const Scorer& scorer() const noexcept { return *scorer_; }
  AnnotationService& annotations() noexcept { return *annotations_; }

  SearchResponse handle_search(std::string_view query, const SearchParams& params = {}) const {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    if (query.find_first_not_of(" \t\r\n") == std::string_view::npos)
      throw RequestError(400, "query must not be empty");
    if (tokenize_words(query).empty())
      throw RequestError(400, "query has no searchable terms");
    const std::size_t k = params.k.value_or(cfg_.results);
    if (k == 0 || k > 1000) throw RequestError(400, "k must be in [1,1000]");
    const std::string engine_name = params.engine.value_or(cfg_.default_engine);
    const auto engine_it = cfg_.engines.find(engine_name);
    if (engine_it == cfg_.engines.end())
      throw RequestError(400, "unknown engine " + engine_name);
    const auto& engine = engine_it->second;

    SearchResponse resp;
    resp.query = std::string(query);
    resp.query_id = query_id_for(query);
    resp.engine = engine_name;

    std::vector<SourceRequest> requests;
    for (const auto& s : sources_) {
      if (!engine.sources.empty() &&
          std::find(engine.sources.begin(), engine.sources.end(), s.name) ==
              engine.sources.end())
        continue;
      requests.push_back({s.source, s.local ? cfg_.local_candidates : cfg_.k_per_source});
    }

    Query q{resp.query_id, resp.query, {}};
    CandidatePool pool;
    try {
      pool = federated_retrieve(q, std::span<const SourceRequest>(requests),
                                cfg_.source_timeout);
    } catch (const RetrievalError& e) {
      throw RequestError(503, e.what());
    }
    for (const auto& f : pool.failures)
      resp.warnings.push_back("source " + f.source + " degraded: " + f.cause);
    const auto t1 = Clock::now();
    resp.timings.retrieval_ms = ms(t1 - t0);
    if (pool.documents.empty()) {
      resp.timings.total_ms = ms(Clock::now() - t0);
      return resp;
    }

    RankedList ranked;
    if (engine.pipeline == EnginePipeline::kSourceOrder) {
      ranked.query_id = pool.query_id;
      ranked.query = resp.query;
      ranked.scorer_name = "source_order";
      for (std::size_t i = 0; i < pool.documents.size(); ++i) {
        RankedEntry e;
        e.document = pool.documents[i];
        e.score = e.document.stage1_score;
        e.rank = i + 1;
        ranked.entries.push_back(std::move(e));
      }
    } else {
      MergeConfig mc;
      mc.windows = cfg_.windows;
      try {
        ranked = merge_and_rank(pool, resp.query, *scorer_, mc);
      } catch (const ScoringError& e) {
        throw RequestError(503, std::string("scoring failed: ") + e.what());
      }
    }
    if (ranked.entries.size() > k) ranked.entries.resize(k);
    const auto t2 = Clock::now();
    resp.timings.rerank_ms = ms(t2 - t1);

    if (engine.pipeline == EnginePipeline::kRerank) {
      HighlightConfig hc;
      hc.top_n = cfg_.highlight_top_n;
      ranked = highlight_top(std::move(ranked), *scorer_, hc);
      if (ranked.degraded) resp.warnings.push_back("highlighting degraded");
    }
    const auto t3 = Clock::now();
    resp.timings.highlight_ms = ms(t3 - t2);

    for (const auto& e : ranked.entries) {
      SearchResult r;
      r.doc_id = e.document.doc_id;
      r.title = e.document.title.value_or("");
      r.url = e.document.url.value_or("");
      r.display_text = display_text_for(e);
      r.source = e.document.source.to_string();
      r.rank = e.rank;
      r.score = e.score;
      r.highlighted = !e.highlights.empty();
      resp.results.push_back(std::move(r));
    }
    resp.timings.total_ms = ms(Clock::now() - t0);
    return resp;
  }

  std::vector<ListItem> engine_list(const std::string& engine, const std::string& query,
                                    std::size_t k) const {
    if (!cfg_.engines.contains(engine)) throw RequestError(400, "unknown engine " + engine);
    const auto resp = handle_search(query, {k, engine});
    std::vector<ListItem> items;
    for (const auto& r : resp.results)
      items.push_back({r.doc_id, r.title, r.url, r.display_text});
    return items;
  }

  static std::vector<NamedSource> build_sources(const ServiceConfig& cfg) {
    cfg.validate();
    std::vector<NamedSource> out;
    std::size_t locals = 0;
    for (const auto& s : cfg.sources) locals += s.type == SourceSpec::Type::kLocal;
    for (const auto& s : cfg.sources) {
      if (s.type == SourceSpec::Type::kLocal) {
        auto index = std::make_shared<const Index>(Index::load(s.index_path));
        // A single local index is reported as plain "local_index".
        out.push_back({s.name,
                       std::make_shared<LocalIndexSource>(std::move(index), cfg.bm25,
                                                          locals > 1 ? s.name : ""),
                       true});
      } else {
        out.push_back({s.name,
                       std::make_shared<ExternalSource>(ExternalSourceConfig{s.name, s.url}),
                       false});
      }
    }
    return out;
  }

  /// The configured scorer, sharded over a worker pool when shards > 1.
  static std::shared_ptr<const Scorer> build_scorer(const ServiceConfig& cfg) {
    auto base = make_scorer(cfg.scorer, cfg.scorer_timeout);
    if (cfg.shards <= 1 && cfg.workers.empty()) return base;
    std::vector<std::shared_ptr<const Scorer>> workers;
    if (cfg.workers.empty()) {
      for (std::size_t i = 0; i < cfg.shards; ++i) workers.push_back(base);
    } else {
      for (const auto& url : cfg.workers)
        workers.push_back(std::make_shared<RemoteScorer>(url, cfg.scorer_timeout));
    }
    ScoringPool::Options opts;
    opts.retry_budget = cfg.retry_budget;
    auto pool = std::make_shared<ScoringPool>(std::move(workers), std::move(opts));
    return std::make_shared<ShardedScorer>(std::move(pool), cfg.shards);
  }

 private:
  static double ms(std::chrono::steady_clock::duration d) {
    return std::chrono::duration<double, std::milli>(d).count();
  }

  const NamedSource* find_source(const std::string& name) const {
    for (const auto& s : sources_)
      if (s.name == name) return &s;
    return nullptr;
  }

  ServiceConfig cfg_;
  std::vector<NamedSource> sources_;
  std::shared_ptr<const Scorer> scorer_;
  std::unique_ptr<AnnotationService> annotations_;
};

}  // namespace nsx
