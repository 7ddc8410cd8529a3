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

// Service configuration, loaded from a single JSON document. Every field has
// a default; see README.md for the full schema.

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsx/error.hpp"
#include "nsx/http.hpp"
#include "nsx/index.hpp"
#include "nsx/text.hpp"

namespace nsx {

struct SourceSpec {
  enum class Type { kLocal, kExternal };

  std::string name;
  Type type = Type::kLocal;
  std::string index_path;  // kLocal
  std::string url;         // kExternal
};

enum class EnginePipeline {
  kRerank,       // retrieve, merge with the scorer, highlight
  kSourceOrder,  // retrieve only; results in the order sources returned them
};

struct EngineSpec {
  EnginePipeline pipeline = EnginePipeline::kRerank;
  std::vector<std::string> sources;  // empty: all sources
};

struct ServiceConfig {
  std::vector<SourceSpec> sources;  // priority order
  std::string scorer = "lexical";
  std::size_t shards = 10;
  /// Remote model-server URLs, one worker each. Empty: `shards` in-process
  /// copies of the scorer.
  std::vector<std::string> workers;
  std::size_t retry_budget = 2;
  WindowConfig windows;
  Bm25Params bm25;
  std::size_t highlight_top_n = 10;
  std::size_t results = 10;
  std::size_t k_per_source = 10;
  std::size_t local_candidates = 1000;
  std::chrono::milliseconds source_timeout{2000};
  std::chrono::milliseconds scorer_timeout{30000};
  std::string judgment_store;  // empty: in-memory only
  int max_grade = 2;
  std::map<std::string, EngineSpec> engines;
  std::string default_engine = "nsx";

  void validate() const {
    if (sources.empty()) throw InvalidArgument("config: no sources");
    std::set<std::string> names;
    for (const auto& s : sources) {
      if (s.name.empty()) throw InvalidArgument("config: source without a name");
      if (!names.insert(s.name).second)
        throw InvalidArgument("config: duplicate source name " + s.name);
      if (s.type == SourceSpec::Type::kExternal) parse_endpoint(s.url);
      if (s.type == SourceSpec::Type::kLocal && s.index_path.empty())
        throw InvalidArgument("config: local source " + s.name + " has no index");
    }
    if (scorer != "lexical" && !scorer.starts_with("remote:"))
      throw InvalidArgument("config: unknown scorer " + scorer);
    if (scorer.starts_with("remote:")) parse_endpoint(scorer.substr(7));
    for (const auto& w : workers) parse_endpoint(w);
    if (shards == 0) throw InvalidArgument("config: shards must be >= 1");
    if (retry_budget == 0) throw InvalidArgument("config: retry_budget must be >= 1");
    windows.validate();
    bm25.validate();
    if (results == 0) throw InvalidArgument("config: results must be >= 1");
    if (k_per_source == 0 || local_candidates == 0)
      throw InvalidArgument("config: retrieval depths must be >= 1");
    if (max_grade < 1) throw InvalidArgument("config: max_grade must be >= 1");
    for (const auto& [name, engine] : engines)
      for (const auto& src : engine.sources)
        if (!names.contains(src))
          throw InvalidArgument("config: engine " + name + " uses unknown source " + src);
    if (!engines.contains(default_engine))
      throw InvalidArgument("config: default engine " + default_engine + " not defined");
  }

  /// Missing keys keep their defaults. Relative index and store paths are
  /// resolved against `base_dir`.
  static ServiceConfig from_json(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir = {}) {
    ServiceConfig c;
    auto resolve = [&](const std::string& p) {
      if (p.empty() || base_dir.empty() || std::filesystem::path(p).is_absolute())
        return p;
      return (base_dir / p).string();
    };
    for (const auto& s : j.value("sources", nlohmann::json::array())) {
      SourceSpec spec;
      spec.name = s.value("name", "");
      const auto type = s.value("type", "local");
      if (type == "local") {
        spec.type = SourceSpec::Type::kLocal;
        spec.index_path = resolve(s.value("index", ""));
      } else if (type == "external") {
        spec.type = SourceSpec::Type::kExternal;
        spec.url = s.value("url", "");
      } else {
        throw InvalidArgument("config: unknown source type " + type);
      }
      c.sources.push_back(std::move(spec));
    }
    c.scorer = j.value("scorer", c.scorer);
    c.shards = j.value("shards", c.shards);
    c.workers = j.value("workers", c.workers);
    c.retry_budget = j.value("retry_budget", c.retry_budget);
    if (auto w = j.find("window"); w != j.end()) {
      c.windows.window_size = w->value("size", c.windows.window_size);
      c.windows.stride = w->value("stride", c.windows.stride);
    }
    if (auto b = j.find("bm25"); b != j.end()) {
      c.bm25.k1 = b->value("k1", c.bm25.k1);
      c.bm25.b = b->value("b", c.bm25.b);
    }
    c.highlight_top_n = j.value("highlight_top_n", c.highlight_top_n);
    c.results = j.value("results", c.results);
    c.k_per_source = j.value("k_per_source", c.k_per_source);
    c.local_candidates = j.value("local_candidates", c.local_candidates);
    if (auto t = j.find("timeouts_ms"); t != j.end()) {
      c.source_timeout = std::chrono::milliseconds(
          t->value("source", static_cast<long long>(c.source_timeout.count())));
      c.scorer_timeout = std::chrono::milliseconds(
          t->value("scorer", static_cast<long long>(c.scorer_timeout.count())));
    }
    c.judgment_store = resolve(j.value("judgment_store", c.judgment_store));
    c.max_grade = j.value("max_grade", c.max_grade);
    if (auto e = j.find("engines"); e != j.end()) {
      for (const auto& [name, spec] : e->items()) {
        EngineSpec es;
        const auto pipeline = spec.value("pipeline", "rerank");
        if (pipeline == "rerank") es.pipeline = EnginePipeline::kRerank;
        else if (pipeline == "source_order") es.pipeline = EnginePipeline::kSourceOrder;
        else throw InvalidArgument("config: unknown pipeline " + pipeline);
        es.sources = spec.value("sources", std::vector<std::string>{});
        c.engines[name] = std::move(es);
      }
    }
    c.default_engine = j.value("default_engine", c.default_engine);
    if (c.engines.empty()) c.engines[c.default_engine] = EngineSpec{};
    c.validate();
    return c;
  }

  static ServiceConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config " + path.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("config " + path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
  }
};

}  // namespace nsx
