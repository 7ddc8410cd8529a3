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

// Relevance scorers: the (query, text) -> score interface used for merging
// and highlighting, a deterministic lexical implementation, and a client for
// remote model servers.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsx/error.hpp"
#include "nsx/http.hpp"
#include "nsx/index.hpp"
#include "nsx/text.hpp"

namespace nsx {

/// Batch-wide state a scorer derives once and reuses when a batch is scored
/// in pieces. Scorers that need no batch context never create one.
class ScoringContext {
 public:
  virtual ~ScoringContext() = default;
};

class ScoringError : public Error {
 public:
  ScoringError(const std::string& what, bool retryable,
               std::optional<std::size_t> shard = std::nullopt)
      : Error(shard ? "shard " + std::to_string(*shard) + ": " + what : what),
        retryable_(retryable),
        shard_(shard) {}

  bool retryable() const noexcept { return retryable_; }
  std::optional<std::size_t> shard() const noexcept { return shard_; }

 private:
  bool retryable_;
  std::optional<std::size_t> shard_;
};

/// The worker serving a request went away. Always retryable elsewhere.
class WorkerEvicted : public ScoringError {
 public:
  explicit WorkerEvicted(const std::string& what) : ScoringError(what, true) {}
};

/// Scores (query, text) pairs. Implementations are deterministic, safe for
/// concurrent calls, and order-equivariant in `texts`.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::string name() const = 0;

  /// Derive batch-wide statistics from the complete batch. The default has
  /// none.
  virtual std::shared_ptr<const ScoringContext> prepare(
      std::string_view /*query*/, std::span<const std::string> /*texts*/) const {
    return nullptr;
  }

  /// Score `texts`, which may be a slice of the batch `context` was prepared
  /// from. A null context means `texts` is the whole batch.
  virtual std::vector<double> score(std::string_view query,
                                    std::span<const std::string> texts,
                                    const ScoringContext* context) const = 0;

  std::vector<double> score_batch(std::string_view query,
                                  std::span<const std::string> texts) const {
    const auto context = prepare(query, texts);
    return score(query, texts, context.get());
  }
};

/// BM25-style cross-scorer whose idf and average length come from the batch
/// itself, so it needs no index.
class LexicalScorer final : public Scorer {
 public:
  struct Stats final : ScoringContext {
    std::size_t batch_size = 0;
    std::uint64_t total_length = 0;
    std::map<std::string, std::size_t> document_frequency;  // query terms only

    double average_length() const {
      return batch_size == 0 ? 0.0
                             : static_cast<double>(total_length) /
                                   static_cast<double>(batch_size);
    }
  };

  explicit LexicalScorer(Bm25Params params = {}) : params_(params) {
    params_.validate();
  }

  std::string name() const override { return "lexical"; }

  std::shared_ptr<const ScoringContext> prepare(
      std::string_view query,
      std::span<const std::string> texts) const override {
    return compute_stats(unique_terms(query), texts);
  }

  std::vector<double> score(std::string_view query,
                            std::span<const std::string> texts,
                            const ScoringContext* context) const override {
    const auto terms = unique_terms(query);
    std::shared_ptr<const Stats> owned;
    const Stats* stats = dynamic_cast<const Stats*>(context);
    if (stats == nullptr) {
      owned = compute_stats(terms, texts);
      stats = owned.get();
    }
    std::vector<double> scores(texts.size(), 0.0);
    if (terms.empty()) return scores;

    const double n = static_cast<double>(stats->batch_size);
    const double avglen = stats->average_length();
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto tokens = tokenize_words(texts[i]);
      std::unordered_map<std::string_view, std::size_t> tf;
      for (const auto& t : tokens) ++tf[t];
      double s = 0.0;
      for (const auto& term : terms) {
        auto it = tf.find(term);
        if (it == tf.end()) continue;
        auto df_it = stats->document_frequency.find(term);
        const double df = df_it == stats->document_frequency.end()
                              ? 0.0
                              : static_cast<double>(df_it->second);
        s += bm25_idf(n, df) *
             bm25_tf(static_cast<double>(it->second),
                     static_cast<double>(tokens.size()), avglen, params_);
      }
      scores[i] = s;
    }
    return scores;
  }

 private:
  static std::vector<std::string> unique_terms(std::string_view query) {
    auto terms = tokenize_words(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
  }

  // Integer accumulation keeps the stats independent of batch order.
  static std::shared_ptr<const Stats> compute_stats(
      const std::vector<std::string>& terms,
      std::span<const std::string> texts) {
    auto stats = std::make_shared<Stats>();
    stats->batch_size = texts.size();
    for (const auto& t : terms) stats->document_frequency[t] = 0;
    for (const auto& text : texts) {
      auto tokens = tokenize_words(text);
      stats->total_length += tokens.size();
      std::sort(tokens.begin(), tokens.end());
      tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
      for (auto& [term, df] : stats->document_frequency)
        if (std::binary_search(tokens.begin(), tokens.end(), term)) ++df;
    }
    return stats;
  }

  Bm25Params params_;
};

/// Model-server client: POST {"query", "texts"} -> {"scores"}.
class RemoteScorer final : public Scorer {
 public:
  RemoteScorer(std::string url, std::chrono::milliseconds timeout)
      : url_(std::move(url)), endpoint_(parse_endpoint(url_)), timeout_(timeout) {}

  std::string name() const override { return "remote:" + url_; }

  std::vector<double> score(std::string_view query,
                            std::span<const std::string> texts,
                            const ScoringContext*) const override {
    return remote_score(endpoint_, query, texts, timeout_);
  }

  static std::vector<double> remote_score(const Endpoint& endpoint,
                                          std::string_view query,
                                          std::span<const std::string> texts,
                                          std::chrono::milliseconds timeout) {
    auto client = make_client(endpoint, timeout);
    nlohmann::json body = {{"query", query},
                           {"texts", std::vector<std::string>(texts.begin(),
                                                              texts.end())}};
    auto res = client->Post(endpoint.path_or("/score"), body.dump(),
                            "application/json");
    if (!res) {
      if (is_timeout(res.error()))
        throw ScoringError("scoring request timed out after " +
                               std::to_string(timeout.count()) + " ms",
                           true);
      throw ScoringError("scoring request failed: " +
                             httplib::to_string(res.error()),
                         true);
    }
    if (res->status != 200)
      throw ScoringError("model server returned HTTP " +
                             std::to_string(res->status),
                         true);
    std::vector<double> scores;
    try {
      const auto doc = nlohmann::json::parse(res->body);
      for (const auto& v : doc.at("scores")) {
        if (!v.is_number()) throw InvalidArgument("non-numeric score");
        scores.push_back(v.get<double>());
      }
    } catch (const std::exception& e) {
      throw ScoringError(std::string("malformed scoring response: ") + e.what(),
                         true);
    }
    if (scores.size() != texts.size())
      throw ScoringError("length mismatch: got " + std::to_string(scores.size()) +
                             " scores for " + std::to_string(texts.size()) +
                             " texts",
                         true);
    return scores;
  }

 private:
  std::string url_;
  Endpoint endpoint_;
  std::chrono::milliseconds timeout_;
};

/// "lexical" or "remote:URL".
inline std::shared_ptr<const Scorer> make_scorer(
    std::string_view spec, std::chrono::milliseconds timeout) {
  if (spec == "lexical") return std::make_shared<LexicalScorer>();
  if (spec.starts_with("remote:"))
    return std::make_shared<RemoteScorer>(std::string(spec.substr(7)), timeout);
  throw InvalidArgument("unknown scorer: " + std::string(spec));
}

}  // namespace nsx
