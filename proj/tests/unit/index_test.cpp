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
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "gen.hpp"
#include "nsx/index.hpp"
#include "oracles.hpp"

namespace nsx {
namespace {

std::string repeat_words(std::size_t n, const std::string& w = "filler") {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + w + std::to_string(i % 7);
  return s;
}

std::vector<std::pair<std::string, double>> ranked(const Index& idx, const std::string& q,
                                                   std::size_t k, Bm25Params p = {}) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& h : idx.search(q, k, p))
    out.emplace_back(idx.documents()[h.doc].doc_id, h.score);
  return out;
}

TEST(Bm25, IdfAndTermComponent) {
  EXPECT_DOUBLE_EQ(bm25_idf(2, 1), std::log(2.0));
  Bm25Params p;
  EXPECT_DOUBLE_EQ(p.k1, 0.9);
  EXPECT_DOUBLE_EQ(p.b, 0.4);
  EXPECT_DOUBLE_EQ(bm25_tf(1, 5, 5, p), 1.0);
}

TEST(Bm25, ParamsValidation) {
  EXPECT_THROW((Bm25Params{0.0, 0.4}.validate()), InvalidArgument);
  EXPECT_THROW((Bm25Params{0.9, 1.5}.validate()), InvalidArgument);
  EXPECT_NO_THROW((Bm25Params{0.9, 0.0}.validate()));
}

TEST(Index, ThreeHundredWordDocumentMakesThreePassages) {
  auto idx = Index::build({{"d", "", repeat_words(300)}});
  EXPECT_EQ(idx.document_count(), 1u);
  EXPECT_EQ(idx.passage_count(), 3u);
}

TEST(Index, EmptyCorpus) {
  auto idx = Index::build({});
  EXPECT_EQ(idx.passage_count(), 0u);
  EXPECT_EQ(idx.average_passage_length(), 0.0);
  EXPECT_TRUE(idx.search("anything", 10).empty());
}

TEST(Index, DuplicateIdRejectedWithId) {
  try {
    Index::build({{"a", "", "x"}, {"b", "", "y"}, {"a", "", "z"}});
    FAIL() << "expected rejection";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("a"), std::string::npos);
  }
}

TEST(Index, DocumentFrequencyCountsPassages) {
  auto idx = Index::build({{"d1", "", "the law of the land"}, {"d2", "", "a river runs"}});
  EXPECT_EQ(idx.document_frequency("law"), 1u);
  EXPECT_EQ(idx.document_frequency("missing"), 0u);
  // Two windows of the same document both containing the term count twice.
  auto idx2 = Index::build({{"d", "", "law a b law"}}, {2, 2});
  EXPECT_EQ(idx2.passage_count(), 2u);
  EXPECT_EQ(idx2.document_frequency("law"), 2u);
}

TEST(Bm25Search, TermInOneOfTwoDocs) {
  auto idx = Index::build({{"d1", "", "alpha beta"}, {"d2", "", "gamma delta"}});
  const auto r = ranked(idx, "gamma", 10);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].first, "d2");
}

TEST(Bm25Search, ToyValueIsLnTwo) {
  auto idx = Index::build({{"d1", "", "law"}, {"d2", "", "sea"}});
  const auto r = ranked(idx, "law", 10);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].second, std::log(2.0));
  EXPECT_NEAR(r[0].second, 0.6931, 5e-5);
}

TEST(Bm25Search, KLargerThanCorpusHasNoPadding) {
  auto idx = Index::build({{"a", "", "x y"}, {"b", "", "x"}, {"c", "", "z"}});
  EXPECT_EQ(ranked(idx, "x", 100).size(), 2u);
}

TEST(Bm25Search, EmptyQueryAndZeroK) {
  auto idx = Index::build({{"a", "", "x"}});
  EXPECT_TRUE(idx.search("?!", 10).empty());
  EXPECT_THROW(idx.search("x", 0), InvalidArgument);
}

TEST(Bm25Search, TiesByAscendingDocId) {
  auto idx = Index::build({{"c", "", "x y"}, {"a", "", "x y"}, {"b", "", "x y"}});
  const auto r = ranked(idx, "x", 3);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].first, "a");
  EXPECT_EQ(r[1].first, "b");
  EXPECT_EQ(r[2].first, "c");
}

TEST(Bm25Search, RepeatedQueryTermsCountOnce) {
  auto idx = Index::build({{"a", "", "x y"}, {"b", "", "z"}});
  EXPECT_EQ(ranked(idx, "x x X", 1)[0].second, ranked(idx, "x", 1)[0].second);
}

TEST(Bm25Search, MatchesOracleOnRandomCorpora) {
  gen::Gen g(99);
  for (int c = 0; c < 300; ++c) {
    const std::size_t ndocs = g.size(1, 50);
    const std::size_t size = g.size(2, 20);
    const std::size_t stride = g.size(1, size);
    std::vector<Document> corpus;
    std::vector<oracle::OracleDoc> odocs;
    for (std::size_t d = 0; d < ndocs; ++d) {
      const auto text = g.text(g.size(1, 60), 25);
      corpus.push_back({"d" + std::to_string(d), "", text});
      odocs.push_back({"d" + std::to_string(d), text});
    }
    const auto query = g.text(g.size(1, 4), 25);
    const Bm25Params p{g.real(0.5, 2.0), g.real(0.0, 1.0)};
    auto idx = Index::build(corpus, {size, stride});
    const auto got = ranked(idx, query, ndocs, p);
    const auto want = oracle::bm25_documents(odocs, query, size, stride, p.k1, p.b);
    ASSERT_EQ(got.size(), want.size()) << "case " << c;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i].second, want[i].second, 1e-9 * std::abs(want[i].second))
          << "case " << c << " rank " << i;
      // Near-ties may legitimately swap under rounding; scores must agree.
      if (i + 1 < got.size() && std::abs(want[i].second - want[i + 1].second) > 1e-9) {
        EXPECT_EQ(got[i].first, want[i].first) << "case " << c << " rank " << i;
      }
    }
  }
}

TEST(Bm25Properties, AddingAQueryTermOccurrenceNeverLowersThatPassage) {
  gen::Gen g(5);
  for (int c = 0; c < 300; ++c) {
    std::vector<std::string> passages;
    for (std::size_t i = 0, n = g.size(2, 10); i < n; ++i)
      passages.push_back(g.text(g.size(1, 12), 12));
    const std::string term = g.word(12);
    const std::size_t target = g.size(0, passages.size() - 1);
    auto build = [&](const std::vector<std::string>& ps) {
      std::vector<Document> corpus;
      for (std::size_t i = 0; i < ps.size(); ++i)
        corpus.push_back({"p" + std::to_string(i), "", ps[i]});
      return Index::build(corpus, {1000, 1000});
    };
    auto score_of = [&](const Index& idx) {
      for (const auto& h : idx.search(term, passages.size()))
        if (h.doc == target) return h.score;
      return 0.0;
    };
    const double before = score_of(build(passages));
    auto more = passages;
    // Length and collection statistics stay fixed: one non-query word of the
    // passage is replaced by the term.
    auto words = oracle::ws_words(passages[target]);
    for (auto& w : words) {
      if (oracle::ascii_words(w) != std::vector<std::string>{term}) {
        w = term;
        break;
      }
    }
    std::string swapped;
    for (const auto& w : words) swapped += (swapped.empty() ? "" : " ") + w;
    more[target] = swapped;
    const double after = score_of(build(more));
    if (oracle::ascii_words(swapped).size() == oracle::ascii_words(passages[target]).size()) {
      EXPECT_GE(after + 1e-12, before) << "case " << c;
    }
  }
}

TEST(Bm25Properties, TermComponentGrowsWithAnExtraOccurrence) {
  gen::Gen g(51);
  for (int c = 0; c < 2000; ++c) {
    const Bm25Params p{g.real(0.1, 3.0), g.real(0.0, 1.0)};
    const double tf = static_cast<double>(g.size(0, 20));
    const double len = tf + static_cast<double>(g.size(0, 200));
    const double avg = g.real(1.0, 150.0);
    EXPECT_GE(bm25_tf(tf + 1, len + 1, avg, p), bm25_tf(tf, len, avg, p));
  }
}

TEST(Bm25Properties, DocumentScoreIsMaxOverItsPassages) {
  gen::Gen g(6);
  for (int c = 0; c < 200; ++c) {
    std::vector<Document> corpus;
    for (std::size_t d = 0, n = g.size(1, 20); d < n; ++d)
      corpus.push_back({"d" + std::to_string(d), "", g.text(g.size(1, 80), 20)});
    const std::size_t size = g.size(3, 15);
    const WindowConfig cfg{size, g.size(1, size)};
    auto idx = Index::build(corpus, cfg);
    const auto query = g.text(g.size(1, 3), 20);
    // Score every passage as its own one-passage "document" in a shadow
    // index with identical passage statistics.
    std::vector<Document> shadow;
    std::vector<std::size_t> owner;
    for (std::size_t d = 0; d < corpus.size(); ++d)
      for (const auto& p : split_into_windows(corpus[d].doc_id, corpus[d].text, cfg)) {
        shadow.push_back({"s" + std::to_string(shadow.size()), "", p.text});
        owner.push_back(d);
      }
    auto sidx = Index::build(shadow, {100000, 100000});
    std::vector<double> best(corpus.size(), 0.0);
    for (const auto& h : sidx.search(query, shadow.size()))
      best[owner[h.doc]] = std::max(best[owner[h.doc]], h.score);
    for (const auto& h : idx.search(query, corpus.size()))
      EXPECT_DOUBLE_EQ(h.score, best[h.doc]) << "case " << c;
  }
}

TEST(Index, SaveLoadRoundTrip) {
  gen::Gen g(8);
  std::vector<Document> corpus;
  for (int d = 0; d < 40; ++d)
    corpus.push_back({"doc" + std::to_string(d), "Title " + std::to_string(d),
                      g.text(g.size(1, 200), 40)});
  auto idx = Index::build(corpus, {20, 10});
  const auto dir = std::filesystem::temp_directory_path() / "nsx_index_roundtrip";
  std::filesystem::remove_all(dir);
  idx.save(dir);
  auto loaded = Index::load(dir);
  EXPECT_EQ(loaded.windows(), idx.windows());
  EXPECT_EQ(loaded.passage_count(), idx.passage_count());
  EXPECT_EQ(loaded.average_passage_length(), idx.average_passage_length());
  ASSERT_EQ(loaded.document_count(), idx.document_count());
  EXPECT_EQ(loaded.documents()[3].title, "Title 3");
  for (std::size_t d = 0; d < corpus.size(); ++d)
    EXPECT_EQ(loaded.documents()[d].text, corpus[d].text);
  for (int q = 0; q < 20; ++q) {
    const auto query = g.text(2, 40);
    const auto a = ranked(idx, query, 40);
    const auto b = ranked(loaded, query, 40);
    EXPECT_EQ(a, b);
  }
  EXPECT_TRUE(loaded.find("doc7").has_value());
  EXPECT_FALSE(loaded.find("nope").has_value());
  std::filesystem::remove_all(dir);
}

TEST(Index, LoadRejectsNonIndexDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "nsx_not_an_index";
  std::filesystem::create_directories(dir);
  EXPECT_THROW(Index::load(dir), InvalidArgument);
}

TEST(Corpus, ReadsThreeAndTwoColumnRows) {
  std::istringstream in("a\tTitle A\tbody a\r\nb\tbody b only\n\nc\t\tno title\n");
  const auto docs = read_corpus_tsv(in);
  ASSERT_EQ(docs.size(), 3u);
  EXPECT_EQ(docs[0].title, "Title A");
  EXPECT_EQ(docs[0].text, "body a");
  EXPECT_EQ(docs[1].title, "");
  EXPECT_EQ(docs[1].text, "body b only");
  EXPECT_EQ(docs[2].text, "no title");
}

TEST(Corpus, MalformedLineReportsLineNumber) {
  std::istringstream in("a\tok\nbroken line\n");
  try {
    read_corpus_tsv(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

}  // namespace
}  // namespace nsx
