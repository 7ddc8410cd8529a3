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

#pragma once

#include <algorithm>
#include <future>
#include <numeric>
#include <vector>

#include "nsx/rank.hpp"
#include "nsx/scorer.hpp"
#include "nsx/text.hpp"

namespace nsx {

struct HighlightConfig {
  std::size_t top_n = 10;
  std::size_t sentences_per_document = 2;
};

/// Picks the highest-scoring sentences (ties to the earlier one) and returns
/// them in document order.
inline std::vector<Sentence> select_highlights(std::vector<Sentence> sentences,
                                               const std::vector<double>& scores,
                                               std::size_t limit) {
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  order.resize(std::min(limit, order.size()));
  std::sort(order.begin(), order.end());
  std::vector<Sentence> picked;
  for (auto i : order) picked.push_back(std::move(sentences[i]));
  return picked;
}

/// Attaches highlights to the first `top_n` non-snippet entries. Never
/// changes which entries are present or their order. A scorer failure leaves
/// that entry without highlights and marks the list degraded.
inline RankedList highlight_top(RankedList ranked, const Scorer& scorer,
                                const HighlightConfig& cfg = {}) {
  struct Outcome {
    std::vector<Sentence> highlights;
    bool failed = false;
  };
  const std::size_t limit = std::min(cfg.top_n, ranked.entries.size());
  std::vector<std::future<Outcome>> pending(limit);
  for (std::size_t i = 0; i < limit; ++i) {
    const auto& doc = ranked.entries[i].document;
    if (doc.is_snippet) continue;
    pending[i] = std::async(std::launch::async, [&doc, &ranked, &scorer, &cfg] {
      Outcome out;
      auto sentences = split_into_sentences(doc.doc_id, doc.text);
      if (sentences.empty()) return out;
      std::vector<std::string> texts;
      texts.reserve(sentences.size());
      for (const auto& s : sentences) texts.push_back(s.text);
      try {
        const auto scores = scorer.score_batch(ranked.query, texts);
        if (scores.size() != texts.size()) {
          out.failed = true;
          return out;
        }
        out.highlights = select_highlights(std::move(sentences), scores,
                                           cfg.sentences_per_document);
      } catch (const std::exception&) {
        out.failed = true;
      }
      return out;
    });
  }
  for (std::size_t i = 0; i < limit; ++i) {
    if (!pending[i].valid()) continue;
    auto out = pending[i].get();
    auto& entry = ranked.entries[i];
    entry.highlighted = !out.failed;
    entry.highlight_failed = out.failed;
    entry.highlights = std::move(out.highlights);
    if (out.failed) ranked.degraded = true;
  }
  return ranked;
}

}  // namespace nsx
