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

#include <string>
#include <vector>

#include "gen.hpp"
#include "nsx/text.hpp"
#include "oracles.hpp"

namespace nsx {
namespace {

using Strings = std::vector<std::string>;

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) s += ' ';
    s += "w" + std::to_string(i);
  }
  return s;
}

TEST(Tokenize, PunctuationSeparates) {
  EXPECT_EQ(tokenize_words("Hello, world!"), (Strings{"hello", "world"}));
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize_words("").empty()); }

TEST(Tokenize, HyphenAndDigits) {
  EXPECT_EQ(tokenize_words("mT5-3B reranker"), (Strings{"mt5", "3b", "reranker"}));
}

TEST(Tokenize, NonAsciiLettersAreWordCharacters) {
  EXPECT_EQ(tokenize_words("Ação jurídica: ÉTAT"), (Strings{"ação", "jurídica", "état"}));
  EXPECT_EQ(tokenize_words("Ωμέγα—Δ"), (Strings{"ωμέγα", "δ"}));
  EXPECT_EQ(tokenize_words("a\xC2\xA0" "b"), (Strings{"a", "b"}));
}

TEST(Tokenize, MalformedUtf8DoesNotThrow) {
  const std::string bad = std::string("ok") + char(0xC3) + " next" + char(0xFF);
  EXPECT_NO_THROW(tokenize_words(bad));
  const auto t = tokenize_words(bad);
  EXPECT_EQ(t.front(), "ok");
}

TEST(Tokenize, IdempotentOnRandomText) {
  gen::Gen g(11);
  for (int i = 0; i < 500; ++i) {
    const auto t = g.text(g.size(0, 40));
    const auto once = tokenize_words(t);
    std::string joined;
    for (const auto& w : once) joined += w + " ";
    EXPECT_EQ(tokenize_words(joined), once);
    EXPECT_EQ(once, oracle::ascii_words(t));
  }
}

TEST(WindowConfig, Validation) {
  EXPECT_NO_THROW((WindowConfig{150, 75}.validate()));
  EXPECT_NO_THROW((WindowConfig{1, 1}.validate()));
  EXPECT_THROW((WindowConfig{0, 1}.validate()), InvalidArgument);
  EXPECT_THROW((WindowConfig{10, 0}.validate()), InvalidArgument);
  EXPECT_THROW((WindowConfig{10, 11}.validate()), InvalidArgument);
}

TEST(Windows, ThreeHundredWords) {
  const auto p = split_into_windows("d", words(300), {});
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0].word_offset, 0u);
  EXPECT_EQ(p[1].word_offset, 75u);
  EXPECT_EQ(p[2].word_offset, 150u);
  EXPECT_EQ(p[2].word_count, 150u);
}

TEST(Windows, ShorterThanOneWindow) {
  const auto p = split_into_windows("d", words(100), {});
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].word_offset, 0u);
  EXPECT_EQ(p[0].word_count, 100u);
  EXPECT_EQ(p[0].text, words(100));
}

TEST(Windows, OneHundredFiftyOneWords) {
  const auto p = split_into_windows("d", words(151), {});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].word_offset, 0u);
  EXPECT_EQ(p[0].word_count, 150u);
  EXPECT_EQ(p[1].word_offset, 75u);
  EXPECT_EQ(p[1].word_offset + p[1].word_count, 151u);
}

TEST(Windows, EmptyAndWhitespaceOnly) {
  EXPECT_TRUE(split_into_windows("d", "", {}).empty());
  EXPECT_TRUE(split_into_windows("d", " \t\n ", {}).empty());
}

TEST(Windows, TextIsRejoinedWithSingleSpaces) {
  const auto p = split_into_windows("d", "  a\tb\n\nc  d ", {2, 1});
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0].text, "a b");
  EXPECT_EQ(p[1].text, "b c");
  EXPECT_EQ(p[2].text, "c d");
  EXPECT_EQ(p[2].doc_id, "d");
  EXPECT_EQ(p[2].window_index, 2u);
}

TEST(Windows, InvalidConfigThrows) {
  EXPECT_THROW(split_into_windows("d", "a b", {2, 3}), InvalidArgument);
}

// Coverage, exact overlap and offset arithmetic over random (text, cfg).
TEST(WindowProperties, RandomCases) {
  gen::Gen g(2024);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t size = g.size(1, 40);
    const std::size_t stride = g.size(1, size);
    const std::size_t n = g.size(0, 200);
    const auto text = g.text(n);
    const auto ps = split_into_windows("doc", text, {size, stride});
    const auto expected = oracle::window_ranges(oracle::ws_words(text).size(), size, stride);
    ASSERT_EQ(ps.size(), expected.size()) << "case " << c;

    std::vector<bool> covered(n, false);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const auto& p = ps[i];
      EXPECT_EQ(p.window_index, i);
      EXPECT_EQ(p.word_offset, i * stride);
      EXPECT_EQ(p.word_offset, expected[i].first);
      EXPECT_EQ(p.word_offset + p.word_count, expected[i].second);
      EXPECT_FALSE(p.text.empty());
      EXPECT_LE(p.word_count, size);
      for (std::size_t w = p.word_offset; w < p.word_offset + p.word_count; ++w)
        covered[w] = true;
      if (i > 0 && ps[i - 1].word_count == size && p.word_count == size) {
        const auto prev_end = ps[i - 1].word_offset + ps[i - 1].word_count;
        EXPECT_EQ(prev_end - p.word_offset, size - stride);
      }
    }
    for (std::size_t w = 0; w < n; ++w) ASSERT_TRUE(covered[w]) << "case " << c;
    if (n > 0 && n <= size) {
      EXPECT_EQ(ps.size(), 1u);
    }
  }
}

TEST(Sentences, TwoTerminated) {
  const auto s = split_into_sentences("d", "A cat. A dog!");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "A cat.");
  EXPECT_EQ(s[1].text, "A dog!");
  EXPECT_EQ(s[1].ordinal, 1u);
}

TEST(Sentences, Unterminated) {
  const auto s = split_into_sentences("d", "no terminator");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].text, "no terminator");
}

TEST(Sentences, DotInsideToken) {
  const auto s = split_into_sentences("d", "v1.2 works. Yes.");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "v1.2 works.");
  EXPECT_EQ(s[1].text, "Yes.");
}

TEST(Sentences, EmptyPiecesDropped) {
  EXPECT_TRUE(split_into_sentences("d", "").empty());
  EXPECT_TRUE(split_into_sentences("d", "   ").empty());
  const auto s = split_into_sentences("d", "Wait... what?!  ");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "Wait...");
  EXPECT_EQ(s[1].text, "what?!");
}

TEST(Sentences, SpansIndexIntoSource) {
  const std::string text = "  One.  Two?\nThree";
  const auto s = split_into_sentences("d", text);
  ASSERT_EQ(s.size(), 3u);
  for (const auto& x : s) EXPECT_EQ(text.substr(x.span.begin, x.span.end - x.span.begin), x.text);
  EXPECT_EQ(s[0].span, (CharSpan{2, 6}));
}

TEST(SentenceProperties, ReconstructionAndOrdering) {
  gen::Gen g(77);
  for (int c = 0; c < 500; ++c) {
    std::string text = g.prose(g.size(0, 8));
    if (g.coin(0.3)) text += " trailing words";
    const auto s = split_into_sentences("d", text);
    std::string rebuilt;
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(s[i].ordinal, i);
      EXPECT_FALSE(s[i].text.empty());
      EXPECT_GE(s[i].span.begin, prev_end);
      EXPECT_LT(s[i].span.begin, s[i].span.end);
      EXPECT_EQ(text.substr(s[i].span.begin, s[i].span.end - s[i].span.begin), s[i].text);
      // Everything between spans is whitespace.
      for (std::size_t k = prev_end; k < s[i].span.begin; ++k)
        EXPECT_TRUE(std::isspace(static_cast<unsigned char>(text[k])));
      prev_end = s[i].span.end;
      rebuilt += s[i].text;
    }
    for (std::size_t k = prev_end; k < text.size(); ++k)
      EXPECT_TRUE(std::isspace(static_cast<unsigned char>(text[k])));
    std::string nonspace;
    for (char ch : text)
      if (!std::isspace(static_cast<unsigned char>(ch))) nonspace += ch;
    std::string rebuilt_nonspace;
    for (char ch : rebuilt)
      if (!std::isspace(static_cast<unsigned char>(ch))) rebuilt_nonspace += ch;
    EXPECT_EQ(rebuilt_nonspace, nonspace);
  }
}

}  // namespace
}  // namespace nsx
