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

// Passage-level inverted index with Okapi BM25 ranking.
//
// Documents are split into overlapping word windows before indexing; postings
// refer to passages and a document's score is the maximum over its passages.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsx/error.hpp"
#include "nsx/text.hpp"

namespace nsx {

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;

  void validate() const {
    if (!(k1 > 0)) throw InvalidArgument("bm25 k1 must be > 0");
    if (!(b >= 0 && b <= 1)) throw InvalidArgument("bm25 b must be in [0,1]");
  }
};

/// ln(1 + (N - df + 0.5) / (df + 0.5))
inline double bm25_idf(double n, double df) {
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

/// Saturated term-frequency component of BM25.
inline double bm25_tf(double tf, double len, double avglen,
                      const Bm25Params& p) {
  const double norm = avglen > 0 ? len / avglen : 0.0;
  return tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

struct Document {
  std::string doc_id;
  std::string title;
  std::string text;
};

/// Reads the tab-separated collection layout: `doc_id \t title \t text`, or
/// `doc_id \t text` when the title column is absent.
namespace detail {

/// Backslash escapes for tab, newline, carriage return and backslash.
inline std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    switch (s[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: out.push_back(s[i]);
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<Document> read_corpus_tsv(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    if (t1 == std::string::npos)
      throw ParseError(lineno, "expected tab-separated doc_id and text");
    Document d;
    d.doc_id = line.substr(0, t1);
    const auto t2 = line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      d.text = line.substr(t1 + 1);
    } else {
      d.title = line.substr(t1 + 1, t2 - t1 - 1);
      d.text = line.substr(t2 + 1);
    }
    if (d.doc_id.empty()) throw ParseError(lineno, "empty doc_id");
    docs.push_back(std::move(d));
  }
  return docs;
}

inline std::vector<Document> read_corpus_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw InvalidArgument("cannot open corpus " + p.string());
  return read_corpus_tsv(in);
}

class Index {
 public:
  struct PassageInfo {
    std::uint32_t doc = 0;
    std::uint32_t window_index = 0;
    std::uint32_t word_offset = 0;
    std::uint32_t length = 0;  // token count
  };

  struct Posting {
    std::uint32_t passage = 0;
    std::uint32_t tf = 0;
  };

  struct Hit {
    std::uint32_t doc = 0;
    double score = 0;
  };

  Index() = default;

  /// Throws InvalidArgument naming the first duplicate doc_id.
  static Index build(std::vector<Document> corpus,
                     const WindowConfig& cfg = {}) {
    cfg.validate();
    Index idx;
    idx.windows_ = cfg;
    idx.documents_ = std::move(corpus);
    std::unordered_set<std::string_view> seen;
    std::uint64_t total_len = 0;
    for (std::uint32_t d = 0; d < idx.documents_.size(); ++d) {
      const auto& doc = idx.documents_[d];
      if (!seen.insert(doc.doc_id).second)
        throw InvalidArgument("duplicate doc_id: " + doc.doc_id);
      idx.by_id_.emplace(doc.doc_id, d);
      for (const auto& passage : split_into_windows(doc.doc_id, doc.text, cfg)) {
        const auto pid = static_cast<std::uint32_t>(idx.passages_.size());
        std::map<std::string, std::uint32_t> tf;
        const auto tokens = tokenize_words(passage.text);
        for (const auto& t : tokens) ++tf[t];
        for (auto& [term, count] : tf) idx.postings_[term].push_back({pid, count});
        idx.passages_.push_back(
            {d, static_cast<std::uint32_t>(passage.window_index),
             static_cast<std::uint32_t>(passage.word_offset),
             static_cast<std::uint32_t>(tokens.size())});
        total_len += tokens.size();
      }
    }
    idx.total_length_ = total_len;
    return idx;
  }

  const WindowConfig& windows() const noexcept { return windows_; }
  const std::vector<Document>& documents() const noexcept { return documents_; }
  const std::vector<PassageInfo>& passages() const noexcept { return passages_; }
  std::size_t document_count() const noexcept { return documents_.size(); }
  std::size_t passage_count() const noexcept { return passages_.size(); }

  double average_passage_length() const noexcept {
    return passages_.empty() ? 0.0
                             : static_cast<double>(total_length_) /
                                   static_cast<double>(passages_.size());
  }

  /// Number of passages containing `term` (already normalized).
  std::size_t document_frequency(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    return it == postings_.end() ? 0 : it->second.size();
  }

  const std::vector<Posting>* postings(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    return it == postings_.end() ? nullptr : &it->second;
  }

  std::optional<std::uint32_t> find(std::string_view doc_id) const {
    auto it = by_id_.find(std::string(doc_id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  /// Top-k documents by max passage score; ties by ascending doc_id.
  std::vector<Hit> search(std::string_view query, std::size_t k,
                          const Bm25Params& params = {}) const {
    if (k == 0) throw InvalidArgument("k must be >= 1");
    params.validate();
    auto terms = tokenize_words(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    if (terms.empty()) return {};

    const double n = static_cast<double>(passages_.size());
    const double avglen = average_passage_length();
    std::unordered_map<std::uint32_t, double> passage_scores;
    for (const auto& term : terms) {
      const auto* list = postings(term);
      if (list == nullptr) continue;
      const double idf = bm25_idf(n, static_cast<double>(list->size()));
      for (const auto& post : *list) {
        passage_scores[post.passage] +=
            idf * bm25_tf(post.tf, passages_[post.passage].length, avglen,
                          params);
      }
    }

    std::unordered_map<std::uint32_t, double> doc_scores;
    for (const auto& [pid, score] : passage_scores) {
      const auto d = passages_[pid].doc;
      auto [it, inserted] = doc_scores.try_emplace(d, score);
      if (!inserted) it->second = std::max(it->second, score);
    }

    std::vector<Hit> hits;
    hits.reserve(doc_scores.size());
    for (const auto& [d, score] : doc_scores) hits.push_back({d, score});
    auto better = [&](const Hit& a, const Hit& b) {
      if (a.score != b.score) return a.score > b.score;
      return documents_[a.doc].doc_id < documents_[b.doc].doc_id;
    };
    if (hits.size() > k) {
      std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(k),
                        hits.end(), better);
      hits.resize(k);
    } else {
      std::sort(hits.begin(), hits.end(), better);
    }
    return hits;
  }

  // On-disk layout: meta.json, documents.tsv, passages.tsv, postings.tsv.
  void save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    {
      nlohmann::json meta = {
          {"format", "nsx-index"},
          {"version", 1},
          {"window_size", windows_.window_size},
          {"stride", windows_.stride},
          {"documents", documents_.size()},
          {"passages", passages_.size()},
          {"total_length", total_length_},
      };
      std::ofstream out(dir / "meta.json");
      out << meta.dump(2) << '\n';
    }
    {
      std::ofstream out(dir / "documents.tsv");
      for (const auto& d : documents_)
        out << detail::escape_field(d.doc_id) << '\t' << detail::escape_field(d.title)
            << '\t' << detail::escape_field(d.text) << '\n';
    }
    {
      std::ofstream out(dir / "passages.tsv");
      for (const auto& p : passages_)
        out << p.doc << '\t' << p.window_index << '\t' << p.word_offset << '\t'
            << p.length << '\n';
    }
    {
      std::vector<const std::string*> terms;
      terms.reserve(postings_.size());
      for (const auto& [term, _] : postings_) terms.push_back(&term);
      std::sort(terms.begin(), terms.end(),
                [](const auto* a, const auto* b) { return *a < *b; });
      std::ofstream out(dir / "postings.tsv");
      for (const auto* term : terms) {
        out << *term << '\t';
        bool first = true;
        for (const auto& post : postings_.at(*term)) {
          if (!first) out << ' ';
          first = false;
          out << post.passage << ':' << post.tf;
        }
        out << '\n';
      }
    }
    if (!std::filesystem::exists(dir / "postings.tsv"))
      throw Error("failed to write index to " + dir.string());
  }

  static Index load(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in) throw InvalidArgument("not an index directory: " + dir.string());
    const auto meta = nlohmann::json::parse(meta_in);
    if (meta.value("format", "") != "nsx-index")
      throw InvalidArgument("unrecognized index format in " + dir.string());

    Index idx;
    idx.windows_ = {meta.at("window_size").get<std::size_t>(),
                    meta.at("stride").get<std::size_t>()};
    idx.total_length_ = meta.at("total_length").get<std::uint64_t>();
    {
      std::ifstream in(dir / "documents.tsv");
      std::string line;
      std::size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) throw ParseError(lineno, "documents.tsv");
        const std::string_view row(line);
        Document d{detail::unescape_field(row.substr(0, t1)),
                   detail::unescape_field(row.substr(t1 + 1, t2 - t1 - 1)),
                   detail::unescape_field(row.substr(t2 + 1))};
        idx.by_id_.emplace(d.doc_id, static_cast<std::uint32_t>(idx.documents_.size()));
        idx.documents_.push_back(std::move(d));
      }
    }
    {
      std::ifstream in(dir / "passages.tsv");
      PassageInfo p;
      while (in >> p.doc >> p.window_index >> p.word_offset >> p.length)
        idx.passages_.push_back(p);
    }
    {
      std::ifstream in(dir / "postings.tsv");
      std::string line;
      std::size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(lineno, "postings.tsv");
        auto& list = idx.postings_[line.substr(0, tab)];
        std::istringstream items(line.substr(tab + 1));
        std::string item;
        while (items >> item) {
          const auto colon = item.find(':');
          if (colon == std::string::npos) throw ParseError(lineno, "posting");
          list.push_back(
              {static_cast<std::uint32_t>(std::stoul(item.substr(0, colon))),
               static_cast<std::uint32_t>(std::stoul(item.substr(colon + 1)))});
        }
      }
    }
    if (idx.documents_.size() != meta.at("documents").get<std::size_t>() ||
        idx.passages_.size() != meta.at("passages").get<std::size_t>())
      throw InvalidArgument("index directory is inconsistent: " + dir.string());
    return idx;
  }

 private:
  WindowConfig windows_;
  std::vector<Document> documents_;
  std::vector<PassageInfo> passages_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::unordered_map<std::string, std::uint32_t> by_id_;
  std::uint64_t total_length_ = 0;
};

}  // namespace nsx
