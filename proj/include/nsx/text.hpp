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

// Text segmentation over UTF-8 input.
//
// Words for windowing are whitespace-delimited spans of the original text.
// Tokens for scoring are lowercased alphanumeric runs.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nsx/error.hpp"

namespace nsx {

struct WindowConfig {
  std::size_t window_size = 150;
  std::size_t stride = 75;

  void validate() const {
    if (window_size == 0) throw InvalidArgument("window_size must be >= 1");
    if (stride == 0) throw InvalidArgument("stride must be >= 1");
    if (stride > window_size)
      throw InvalidArgument("stride must not exceed window_size");
  }

  friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

struct Passage {
  std::string doc_id;
  std::size_t window_index = 0;
  std::size_t word_offset = 0;
  std::size_t word_count = 0;
  std::string text;
};

/// Half-open byte range into the source text.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct Sentence {
  std::string doc_id;
  std::size_t ordinal = 0;
  std::string text;
  CharSpan span;
};

namespace detail {

inline bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

/// Decodes one code point starting at `pos`; advances `pos`. Invalid
/// sequences decode to U+FFFD and consume a single byte.
inline char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  for (int i = 1; i < len; ++i) {
    const int c = cont(static_cast<std::size_t>(i));
    if (c < 0) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  pos += static_cast<std::size_t>(len);
  return cp;
}

inline void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Non-ASCII code points count as word characters unless they fall in a
// punctuation, symbol, space or control block. An approximation of the Unicode
// letter and number categories.
inline bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  }
  if (cp == 0xAA || cp == 0xB2 || cp == 0xB3 || cp == 0xB5 || cp == 0xB9 ||
      cp == 0xBA || (cp >= 0xBC && cp <= 0xBE))
    return true;
  if (cp < 0xC0) return false;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp == 0x037E || cp == 0x0387) return false;
  if (cp >= 0x055A && cp <= 0x055F) return false;
  if (cp == 0x0589 || cp == 0x05BE || cp == 0x05C0 || cp == 0x05C3) return false;
  if (cp >= 0x060C && cp <= 0x060D) return false;
  if (cp == 0x061B || cp == 0x061F || cp == 0x06D4) return false;
  if (cp == 0x0964 || cp == 0x0965) return false;
  if (cp == 0x1680) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
  if (cp >= 0x20A0 && cp <= 0x20CF) return false;  // currency
  if (cp >= 0x2190 && cp <= 0x2BFF) return false;  // arrows, math, boxes
  if (cp >= 0x2E00 && cp <= 0x2E7F) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp >= 0xD800 && cp <= 0xDFFF) return false;
  if (cp >= 0xFE10 && cp <= 0xFE1F) return false;
  if (cp >= 0xFE30 && cp <= 0xFE6F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;  // fullwidth punctuation
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0xFF3B && cp <= 0xFF40) return false;
  if (cp >= 0xFF5B && cp <= 0xFF65) return false;
  if (cp >= 0xFFF0 && cp <= 0xFFFF) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji, pictographs
  if (cp >= 0xE0000) return false;
  return true;
}

inline char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  return cp;
}

}  // namespace detail

/// Lowercased maximal runs of letters and digits, in order of appearance.
inline std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = detail::decode_utf8(text, pos);
    if (detail::is_word_char(cp)) {
      detail::encode_utf8(detail::to_lower(cp), current);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

/// Whitespace-delimited words, as views into `text`.
inline std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           detail::is_ascii_space(static_cast<unsigned char>(text[i])))
      ++i;
    const std::size_t start = i;
    while (i < text.size() &&
           !detail::is_ascii_space(static_cast<unsigned char>(text[i])))
      ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

/// Slides a window of `window_size` words over the text with step `stride`.
/// Stops after the first window that reaches the final word, so the tail is
/// covered exactly once.
inline std::vector<Passage> split_into_windows(std::string_view doc_id,
                                               std::string_view text,
                                               const WindowConfig& cfg) {
  cfg.validate();
  const auto words = split_whitespace(text);
  std::vector<Passage> passages;
  const std::size_t n = words.size();
  for (std::size_t offset = 0, index = 0; offset < n;
       offset += cfg.stride, ++index) {
    const std::size_t end = std::min(offset + cfg.window_size, n);
    Passage p;
    p.doc_id = std::string(doc_id);
    p.window_index = index;
    p.word_offset = offset;
    p.word_count = end - offset;
    for (std::size_t w = offset; w < end; ++w) {
      if (w > offset) p.text.push_back(' ');
      p.text.append(words[w]);
    }
    passages.push_back(std::move(p));
    if (end == n) break;
  }
  return passages;
}

/// Rule-based splitter: a sentence ends at '.', '!' or '?' followed by
/// whitespace or end of text. Spans exclude surrounding whitespace.
inline std::vector<Sentence> split_into_sentences(std::string_view doc_id,
                                                  std::string_view text) {
  std::vector<Sentence> sentences;
  auto is_space = [&](std::size_t i) {
    return detail::is_ascii_space(static_cast<unsigned char>(text[i]));
  };
  auto emit = [&](std::size_t begin, std::size_t end) {
    while (begin < end && is_space(begin)) ++begin;
    while (end > begin && is_space(end - 1)) --end;
    if (begin == end) return;
    Sentence s;
    s.doc_id = std::string(doc_id);
    s.ordinal = sentences.size();
    s.text = std::string(text.substr(begin, end - begin));
    s.span = {begin, end};
    sentences.push_back(std::move(s));
  };

  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() || is_space(i + 1))) {
      emit(start, i + 1);
      start = i + 1;
    }
  }
  emit(start, text.size());
  return sentences;
}

}  // namespace nsx
