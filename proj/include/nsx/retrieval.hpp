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

// Candidate retrieval: local BM25 search, external snippet sources and the
// concurrent fan-out that merges them into a deduplicated candidate pool.

#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsx/error.hpp"
#include "nsx/http.hpp"
#include "nsx/index.hpp"

namespace nsx {

struct Query {
  std::string id;
  std::string text;
  std::string language;
};

struct SourceId {
  enum class Kind { kLocalIndex, kExternal };

  Kind kind = Kind::kLocalIndex;
  std::string name;

  static SourceId local(std::string name = {}) {
    return {Kind::kLocalIndex, std::move(name)};
  }
  static SourceId external(std::string name) {
    return {Kind::kExternal, std::move(name)};
  }

  bool is_local() const noexcept { return kind == Kind::kLocalIndex; }

  /// "local_index" (optionally ":name") or "external:name".
  std::string to_string() const {
    if (kind == Kind::kLocalIndex)
      return name.empty() ? "local_index" : "local_index:" + name;
    return "external:" + name;
  }

  friend bool operator==(const SourceId&, const SourceId&) = default;
};

struct SourceDocument {
  std::string doc_id;
  SourceId source;
  std::optional<std::string> title;
  std::optional<std::string> url;
  std::string text;
  bool is_snippet = false;
  double stage1_score = 0;  // only comparable within one source
};

/// Lowercases scheme and host, drops the fragment and a trailing slash.
inline std::string normalize_url(std::string_view url) {
  std::string out(url.substr(0, url.find('#')));
  const auto scheme_end = out.find("://");
  const std::size_t host_start =
      scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto host_end = out.find_first_of("/?", host_start);
  if (host_end == std::string::npos) host_end = out.size();
  for (std::size_t i = 0; i < host_end; ++i)
    out[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[i])));
  if (out.size() > host_start && out.back() == '/') out.pop_back();
  return out;
}

/// BM25 over a passage index, returned as full-text candidate documents.
inline std::vector<SourceDocument> bm25_search(const Index& index,
                                               std::string_view query,
                                               std::size_t k,
                                               const Bm25Params& params = {},
                                               const SourceId& source = {}) {
  std::vector<SourceDocument> out;
  for (const auto& hit : index.search(query, k, params)) {
    const auto& doc = index.documents()[hit.doc];
    SourceDocument sd;
    sd.doc_id = doc.doc_id;
    sd.source = source;
    if (!doc.title.empty()) sd.title = doc.title;
    sd.text = doc.text;
    sd.is_snippet = false;
    sd.stage1_score = hit.score;
    out.push_back(std::move(sd));
  }
  return out;
}

/// Outcome of querying one source. `failed` and `truncated` are exclusive:
/// a timeout sets `truncated`, anything else that prevents a usable response
/// sets `failed`.
struct FetchResult {
  std::vector<SourceDocument> documents;
  bool truncated = false;
  bool failed = false;
  std::string error;
};

class CandidateSource {
 public:
  virtual ~CandidateSource() = default;
  virtual SourceId id() const = 0;
  virtual FetchResult fetch(const Query& query, std::size_t k,
                            std::chrono::milliseconds timeout) const = 0;
};

class LocalIndexSource final : public CandidateSource {
 public:
  LocalIndexSource(std::shared_ptr<const Index> index, Bm25Params params = {},
                   std::string name = {})
      : index_(std::move(index)), params_(params), name_(std::move(name)) {}

  SourceId id() const override { return SourceId::local(name_); }

  FetchResult fetch(const Query& query, std::size_t k,
                    std::chrono::milliseconds) const override {
    FetchResult r;
    r.documents = bm25_search(*index_, query.text, k, params_, id());
    return r;
  }

  const Index& index() const noexcept { return *index_; }

 private:
  std::shared_ptr<const Index> index_;
  Bm25Params params_;
  std::string name_;
};

struct ExternalSourceConfig {
  std::string name;
  std::string url;  // base URL; "/retrieve" is used when it carries no path
};

/// POST {"query", "k"} to the source and convert its snippets into documents.
inline FetchResult fetch_external(const ExternalSourceConfig& source,
                                  const Query& query, std::size_t k,
                                  std::chrono::milliseconds timeout) {
  FetchResult r;
  Endpoint ep;
  try {
    ep = parse_endpoint(source.url);
  } catch (const InvalidArgument& e) {
    r.failed = true;
    r.error = e.what();
    return r;
  }
  auto client = make_client(ep, timeout);
  const nlohmann::json body = {{"query", query.text}, {"k", k}};
  auto res = client->Post(ep.path_or("/retrieve"), body.dump(),
                          "application/json");
  if (!res) {
    if (is_timeout(res.error())) {
      r.truncated = true;
      r.error = "timed out after " + std::to_string(timeout.count()) + " ms";
    } else {
      r.failed = true;
      r.error = httplib::to_string(res.error());
    }
    return r;
  }
  if (res->status != 200) {
    r.failed = true;
    r.error = "HTTP " + std::to_string(res->status);
    return r;
  }
  try {
    const auto doc = nlohmann::json::parse(res->body);
    const auto& results = doc.at("results");
    if (!results.is_array()) throw InvalidArgument("results is not an array");
    for (const auto& item : results) {
      if (r.documents.size() >= k) break;
      SourceDocument sd;
      const auto& id = item.at("id");
      sd.doc_id = source.name + ":" +
                  (id.is_string() ? id.get<std::string>() : id.dump());
      sd.source = SourceId::external(source.name);
      if (auto it = item.find("title"); it != item.end() && it->is_string())
        sd.title = it->get<std::string>();
      if (auto it = item.find("url"); it != item.end() && it->is_string())
        sd.url = it->get<std::string>();
      sd.text = item.at("snippet").get<std::string>();
      sd.is_snippet = true;
      // Provider order is the only stage-1 signal a web API exposes.
      sd.stage1_score = -static_cast<double>(r.documents.size());
      if (sd.text.empty()) continue;
      r.documents.push_back(std::move(sd));
    }
  } catch (const std::exception& e) {
    r.documents.clear();
    r.failed = true;
    r.error = std::string("malformed response: ") + e.what();
  }
  return r;
}

class ExternalSource final : public CandidateSource {
 public:
  explicit ExternalSource(ExternalSourceConfig cfg) : cfg_(std::move(cfg)) {}

  SourceId id() const override { return SourceId::external(cfg_.name); }

  FetchResult fetch(const Query& query, std::size_t k,
                    std::chrono::milliseconds timeout) const override {
    return fetch_external(cfg_, query, k, timeout);
  }

  const ExternalSourceConfig& config() const noexcept { return cfg_; }

 private:
  ExternalSourceConfig cfg_;
};

struct SourceFailure {
  std::string source;
  std::string cause;
};

struct CandidatePool {
  std::string query_id;
  std::vector<SourceDocument> documents;
  std::map<std::string, std::size_t> per_source_counts;
  std::vector<std::string> truncated_sources;
  std::vector<SourceFailure> failures;
};

class RetrievalError : public Error {
 public:
  explicit RetrievalError(std::vector<SourceFailure> causes)
      : Error(describe(causes)), causes_(std::move(causes)) {}

  const std::vector<SourceFailure>& causes() const noexcept { return causes_; }

 private:
  static std::string describe(const std::vector<SourceFailure>& causes) {
    std::string msg = "all sources failed";
    for (const auto& c : causes) msg += "; " + c.source + ": " + c.cause;
    return msg;
  }

  std::vector<SourceFailure> causes_;
};

/// Merges per-source results in priority order, dropping any document whose
/// normalized URL or doc_id was already taken by an earlier one.
inline void add_deduplicated(CandidatePool& pool,
                             std::vector<SourceDocument> docs,
                             std::unordered_set<std::string>& seen_urls,
                             std::unordered_set<std::string>& seen_ids) {
  for (auto& d : docs) {
    if (d.url) {
      auto norm = normalize_url(*d.url);
      if (seen_urls.contains(norm)) continue;
      if (seen_ids.contains(d.doc_id)) continue;
      seen_urls.insert(std::move(norm));
    } else if (seen_ids.contains(d.doc_id)) {
      continue;
    }
    seen_ids.insert(d.doc_id);
    ++pool.per_source_counts[d.source.to_string()];
    pool.documents.push_back(std::move(d));
  }
}

struct SourceRequest {
  std::shared_ptr<const CandidateSource> source;
  std::size_t k = 10;
};

/// Queries every source concurrently, each to its own depth. `requests` is in
/// priority order, which decides which duplicate survives. Throws
/// RetrievalError when no source produced a usable answer.
inline CandidatePool federated_retrieve(const Query& query,
                                        std::span<const SourceRequest> requests,
                                        std::chrono::milliseconds timeout) {
  if (requests.empty()) throw InvalidArgument("no sources configured");
  std::vector<std::future<FetchResult>> pending;
  pending.reserve(requests.size());
  for (const auto& req : requests) {
    pending.push_back(std::async(std::launch::async, [&query, req, timeout] {
      try {
        return req.source->fetch(query, req.k, timeout);
      } catch (const std::exception& e) {
        FetchResult r;
        r.failed = true;
        r.error = e.what();
        return r;
      }
    }));
  }

  CandidatePool pool;
  pool.query_id = query.id;
  std::unordered_set<std::string> seen_urls;
  std::unordered_set<std::string> seen_ids;
  std::size_t usable = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    auto result = pending[i].get();
    const auto name = requests[i].source->id().to_string();
    pool.per_source_counts.try_emplace(name, 0);
    if (result.truncated) pool.truncated_sources.push_back(name);
    if (result.failed || result.truncated)
      pool.failures.push_back({name, result.error});
    else
      ++usable;
    add_deduplicated(pool, std::move(result.documents), seen_urls, seen_ids);
  }
  if (usable == 0 && pool.documents.empty())
    throw RetrievalError(pool.failures);
  return pool;
}

inline CandidatePool federated_retrieve(
    const Query& query,
    std::span<const std::shared_ptr<const CandidateSource>> sources,
    std::size_t k_per_source, std::chrono::milliseconds timeout) {
  std::vector<SourceRequest> requests;
  for (const auto& s : sources) requests.push_back({s, k_per_source});
  return federated_retrieve(query, std::span<const SourceRequest>(requests),
                            timeout);
}

}  // namespace nsx
