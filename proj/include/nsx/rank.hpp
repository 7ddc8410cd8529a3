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

// Merging: every candidate from every source is scored by the same scorer and
// sorted into one list. Source identity and stage-1 scores play no part.

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "nsx/error.hpp"
#include "nsx/retrieval.hpp"
#include "nsx/scorer.hpp"
#include "nsx/text.hpp"

namespace nsx {

struct RankedEntry {
  SourceDocument document;
  double score = 0;
  std::size_t rank = 0;
  bool highlighted = false;       // highlighting ran for this entry
  bool highlight_failed = false;  // scorer failed; no highlights attached
  std::vector<Sentence> highlights;
};

struct RankedList {
  std::string query_id;
  std::string query;
  std::string scorer_name;
  std::vector<RankedEntry> entries;
  bool degraded = false;
};

struct MergeConfig {
  WindowConfig windows;
  /// Keep the pool order when the scorer fails instead of raising.
  bool fallback_to_stage1 = false;
};

/// Sort descending by score, ties by ascending doc_id, then number ranks.
inline void sort_and_number(std::vector<RankedEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.document.doc_id < b.document.doc_id;
                   });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;
}

inline RankedList merge_and_rank(const CandidatePool& pool,
                                 std::string_view query, const Scorer& scorer,
                                 const MergeConfig& cfg = {}) {
  if (pool.documents.empty()) throw InvalidArgument("candidate pool is empty");

  // Snippets are scored as-is; indexed documents window by window.
  std::vector<std::string> texts;
  std::vector<std::size_t> owner;
  for (std::size_t d = 0; d < pool.documents.size(); ++d) {
    const auto& doc = pool.documents[d];
    if (doc.is_snippet) {
      texts.push_back(doc.text);
      owner.push_back(d);
      continue;
    }
    auto windows = split_into_windows(doc.doc_id, doc.text, cfg.windows);
    if (windows.empty()) {
      texts.push_back(doc.text);
      owner.push_back(d);
    }
    for (auto& w : windows) {
      texts.push_back(std::move(w.text));
      owner.push_back(d);
    }
  }

  RankedList list;
  list.query_id = pool.query_id;
  list.query = std::string(query);
  list.scorer_name = scorer.name();
  list.entries.reserve(pool.documents.size());

  std::vector<double> scores;
  try {
    scores = scorer.score_batch(query, texts);
  } catch (const Error&) {
    if (!cfg.fallback_to_stage1) throw;
    list.degraded = true;
    for (std::size_t d = 0; d < pool.documents.size(); ++d) {
      RankedEntry e;
      e.document = pool.documents[d];
      e.score = e.document.stage1_score;
      e.rank = d + 1;
      list.entries.push_back(std::move(e));
    }
    return list;
  }
  if (scores.size() != texts.size())
    throw ScoringError("scorer returned wrong number of scores", false);

  std::vector<double> best(pool.documents.size(), 0.0);
  std::vector<bool> seen(pool.documents.size(), false);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto d = owner[i];
    if (!seen[d] || scores[i] > best[d]) best[d] = scores[i];
    seen[d] = true;
  }
  for (std::size_t d = 0; d < pool.documents.size(); ++d) {
    RankedEntry e;
    e.document = pool.documents[d];
    e.score = best[d];
    list.entries.push_back(std::move(e));
  }
  sort_and_number(list.entries);
  return list;
}

}  // namespace nsx
