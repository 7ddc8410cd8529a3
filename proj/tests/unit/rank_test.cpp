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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fault.hpp"
#include "gen.hpp"
#include "nsx/rank.hpp"
#include "oracles.hpp"

namespace nsx {
namespace {

SourceDocument doc(std::string id, std::string text, SourceId src = SourceId::local(),
                   bool snippet = false, double stage1 = 0) {
  SourceDocument d;
  d.doc_id = std::move(id);
  d.text = std::move(text);
  d.source = std::move(src);
  d.is_snippet = snippet;
  d.stage1_score = stage1;
  return d;
}

std::vector<std::string> ids(const RankedList& l) {
  std::vector<std::string> out;
  for (const auto& e : l.entries) out.push_back(e.document.doc_id);
  return out;
}

CandidatePool random_pool(gen::Gen& g) {
  CandidatePool pool;
  pool.query_id = "q";
  const std::vector<SourceId> sources = {SourceId::local(), SourceId::external("web"),
                                         SourceId::external("news"),
                                         SourceId::local("archive")};
  for (std::size_t i = 0, n = g.size(1, 25); i < n; ++i) {
    const bool snippet = g.coin(0.4);
    pool.documents.push_back(doc("d" + std::to_string(i),
                                 snippet ? g.text(g.size(3, 20), 15) : g.text(g.size(1, 60), 15),
                                 g.pick(sources), snippet, g.real(-10, 10)));
  }
  return pool;
}

MergeConfig small_windows() {
  MergeConfig cfg;
  cfg.windows = {8, 4};
  return cfg;
}

TEST(Merge, SingleDocumentIsRankOne) {
  CandidatePool pool;
  pool.documents.push_back(doc("only", "nothing matches here"));
  const auto list = merge_and_rank(pool, "query", LexicalScorer());
  ASSERT_EQ(list.entries.size(), 1u);
  EXPECT_EQ(list.entries[0].rank, 1u);
  EXPECT_EQ(list.entries[0].score, 0.0);
}

TEST(Merge, ContentBeatsSourcePriority) {
  CandidatePool pool;
  pool.documents.push_back(doc("web:1", "weather report for tomorrow", SourceId::external("web"),
                               true, 100.0));
  pool.documents.push_back(doc("news:9", "maritime law and the law of the sea",
                               SourceId::external("news"), true, -50.0));
  const auto list = merge_and_rank(pool, "law of the sea", LexicalScorer());
  EXPECT_EQ(ids(list), (std::vector<std::string>{"news:9", "web:1"}));
  EXPECT_EQ(list.scorer_name, "lexical");
}

TEST(Merge, EqualScoresByAscendingDocId) {
  CandidatePool pool;
  for (const char* id : {"c", "a", "b"}) pool.documents.push_back(doc(id, "same text"));
  EXPECT_EQ(ids(merge_and_rank(pool, "text", LexicalScorer())),
            (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Merge, EmptyPoolRejected) {
  EXPECT_THROW(merge_and_rank(CandidatePool{}, "q", LexicalScorer()), InvalidArgument);
}

TEST(Merge, ScorerFailureIsAnErrorByDefault) {
  CandidatePool pool;
  pool.documents.push_back(doc("a", "x", SourceId::local(), false, 1.0));
  pool.documents.push_back(doc("b", "y", SourceId::local(), false, 2.0));
  EXPECT_THROW(merge_and_rank(pool, "x", testing::BrokenScorer()), ScoringError);
  MergeConfig cfg;
  cfg.fallback_to_stage1 = true;
  const auto list = merge_and_rank(pool, "x", testing::BrokenScorer(), cfg);
  EXPECT_TRUE(list.degraded);
  EXPECT_EQ(ids(list), (std::vector<std::string>{"a", "b"}));
}

TEST(Merge, LocalDocumentsScoredPerWindowWithMax) {
  // The matching words sit in the last window only.
  std::string text;
  for (int i = 0; i < 20; ++i) text += "filler ";
  text += "needle needle";
  CandidatePool pool;
  pool.documents.push_back(doc("long", text));
  pool.documents.push_back(doc("short", "needle in a short haystack"));
  MergeConfig cfg;
  cfg.windows = {5, 5};
  const auto list = merge_and_rank(pool, "needle", LexicalScorer(), cfg);
  std::vector<std::string> batch = oracle::window_texts(text, 5, 5);
  const std::size_t long_windows = batch.size();
  batch.push_back("needle in a short haystack");
  const auto want = oracle::bm25_passages("needle", batch);
  double best_long = 0;
  for (std::size_t i = 0; i < long_windows; ++i) best_long = std::max(best_long, want[i]);
  std::map<std::string, double> got;
  for (const auto& e : list.entries) got[e.document.doc_id] = e.score;
  EXPECT_NEAR(got["long"], best_long, 1e-12);
  EXPECT_NEAR(got["short"], want.back(), 1e-12);
}

TEST(MergeProperties, MatchesOracleRanking) {
  gen::Gen g(41);
  for (int c = 0; c < 200; ++c) {
    const auto pool = random_pool(g);
    const auto q = g.text(g.size(1, 3), 15);
    const auto list = merge_and_rank(pool, q, LexicalScorer(), small_windows());
    std::vector<std::string> batch;
    std::vector<std::size_t> owner;
    for (std::size_t d = 0; d < pool.documents.size(); ++d) {
      const auto& sd = pool.documents[d];
      const auto pieces = sd.is_snippet ? std::vector<std::string>{sd.text}
                                        : oracle::window_texts(sd.text, 8, 4);
      for (const auto& p : pieces) {
        batch.push_back(p);
        owner.push_back(d);
      }
    }
    const auto s = oracle::bm25_passages(q, batch);
    std::vector<double> best(pool.documents.size(), -1);
    for (std::size_t i = 0; i < s.size(); ++i) best[owner[i]] = std::max(best[owner[i]], s[i]);
    std::map<std::string, double> want;
    for (std::size_t d = 0; d < best.size(); ++d) want[pool.documents[d].doc_id] = best[d];
    ASSERT_EQ(list.entries.size(), pool.documents.size());
    for (const auto& e : list.entries)
      EXPECT_NEAR(e.score, want[e.document.doc_id], 1e-9 * std::abs(e.score) + 1e-300);
  }
}

TEST(MergeProperties, RankedListInvariants) {
  gen::Gen g(42);
  for (int c = 0; c < 300; ++c) {
    const auto list = merge_and_rank(random_pool(g), g.text(2, 15), LexicalScorer(),
                                     small_windows());
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
      EXPECT_EQ(list.entries[i].rank, i + 1);
      if (i == 0) continue;
      const auto& a = list.entries[i - 1];
      const auto& b = list.entries[i];
      EXPECT_GE(a.score, b.score);
      if (a.score == b.score) {
        EXPECT_LT(a.document.doc_id, b.document.doc_id);
      }
    }
  }
}

TEST(MergeProperties, SourceLabelsAndStageOneScoresDoNotMatter) {
  gen::Gen g(43);
  for (int c = 0; c < 100; ++c) {
    const auto pool = random_pool(g);
    const auto q = g.text(2, 15);
    const auto base = ids(merge_and_rank(pool, q, LexicalScorer(), small_windows()));
    auto relabeled = pool;
    std::vector<SourceId> labels;
    for (const auto& d : pool.documents) labels.push_back(d.source);
    g.shuffle(labels);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      relabeled.documents[i].source = labels[i];
      relabeled.documents[i].stage1_score = g.real(-100, 100);
    }
    EXPECT_EQ(ids(merge_and_rank(relabeled, q, LexicalScorer(), small_windows())), base)
        << "case " << c;
  }
}

TEST(MergeProperties, PoolOrderDoesNotMatter) {
  gen::Gen g(44);
  for (int c = 0; c < 100; ++c) {
    auto pool = random_pool(g);
    const auto q = g.text(2, 15);
    const auto base = ids(merge_and_rank(pool, q, LexicalScorer(), small_windows()));
    g.shuffle(pool.documents);
    EXPECT_EQ(ids(merge_and_rank(pool, q, LexicalScorer(), small_windows())), base);
  }
}

}  // namespace
}  // namespace nsx
