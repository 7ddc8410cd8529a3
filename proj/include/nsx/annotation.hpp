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

// Blinded side-by-side annotation.
//
// A session shows two top-10 lists for one query. Which engine produced which
// side is decided by a fair coin and never leaves the server; labels clicked on
// a side are resolved through that hidden mapping into per-engine judgments.
//
// Sessions and labels are persisted as an append-only JSON-lines log that is
// replayed on startup and compacted periodically.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsx/error.hpp"
#include "nsx/eval.hpp"

namespace nsx {

/// An error that maps onto an HTTP status.
class RequestError : public Error {
 public:
  RequestError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

enum class Side { kLeft, kRight };

inline const char* to_string(Side s) { return s == Side::kLeft ? "left" : "right"; }

inline Side parse_side(std::string_view s) {
  if (s == "left") return Side::kLeft;
  if (s == "right") return Side::kRight;
  throw RequestError(400, "side must be \"left\" or \"right\"");
}

struct ListItem {
  std::string doc_id;
  std::string title;
  std::string url;
  std::string display_text;
};

inline void to_json(nlohmann::json& j, const ListItem& i) {
  j = {{"doc_id", i.doc_id}, {"title", i.title}, {"url", i.url},
       {"display_text", i.display_text}};
}
inline void from_json(const nlohmann::json& j, ListItem& i) {
  i.doc_id = j.at("doc_id").get<std::string>();
  i.title = j.value("title", "");
  i.url = j.value("url", "");
  i.display_text = j.value("display_text", "");
}

struct AnnotationSession {
  static constexpr std::size_t kListSize = 10;

  std::string id;
  std::string query_id;
  std::string query;
  std::string engine_a;
  std::string engine_b;
  bool swap = false;  // false: left shows engine_a
  int max_grade = 2;
  std::vector<ListItem> left;
  std::vector<ListItem> right;
  std::map<std::pair<Side, std::size_t>, int> labels;  // (side, 1-based position)

  const std::string& engine_for(Side s) const {
    return (s == Side::kLeft) != swap ? engine_a : engine_b;
  }
  const std::vector<ListItem>& items(Side s) const {
    return s == Side::kLeft ? left : right;
  }
  /// The list engine `name` produced in this session, if it took part.
  const std::vector<ListItem>* list_of(const std::string& name) const {
    if (engine_for(Side::kLeft) == name) return &left;
    if (engine_for(Side::kRight) == name) return &right;
    return nullptr;
  }

  std::size_t labelable() const { return left.size() + right.size(); }

  /// What the annotator's browser sees. Carries no engine names, no document
  /// ids and nothing else derived from the side assignment.
  nlohmann::json client_view() const {
    auto side_items = [](const std::vector<ListItem>& list) {
      nlohmann::json arr = nlohmann::json::array();
      for (std::size_t i = 0; i < list.size(); ++i)
        arr.push_back({{"position", i + 1},
                       {"title", list[i].title},
                       {"url", list[i].url},
                       {"display_text", list[i].display_text}});
      return arr;
    };
    nlohmann::json labels_json = {{"left", nlohmann::json::object()},
                                  {"right", nlohmann::json::object()}};
    for (const auto& [key, grade] : labels)
      labels_json[to_string(key.first)][std::to_string(key.second)] = grade;
    return {{"session_id", id},
            {"query", query},
            {"max_grade", max_grade},
            {"left", side_items(left)},
            {"right", side_items(right)},
            {"labels", labels_json},
            {"labeled", labels.size()},
            {"labelable", labelable()},
            {"complete", labels.size() == labelable()}};
  }

  nlohmann::json to_record() const {
    nlohmann::json lab = nlohmann::json::array();
    for (const auto& [key, grade] : labels)
      lab.push_back({{"side", to_string(key.first)},
                     {"position", key.second},
                     {"grade", grade}});
    return {{"id", id},         {"query_id", query_id}, {"query", query},
            {"engine_a", engine_a}, {"engine_b", engine_b}, {"swap", swap},
            {"max_grade", max_grade}, {"left", left},     {"right", right},
            {"labels", lab}};
  }

  static AnnotationSession from_record(const nlohmann::json& j) {
    AnnotationSession s;
    s.id = j.at("id").get<std::string>();
    s.query_id = j.at("query_id").get<std::string>();
    s.query = j.at("query").get<std::string>();
    s.engine_a = j.at("engine_a").get<std::string>();
    s.engine_b = j.at("engine_b").get<std::string>();
    s.swap = j.at("swap").get<bool>();
    s.max_grade = j.at("max_grade").get<int>();
    s.left = j.at("left").get<std::vector<ListItem>>();
    s.right = j.at("right").get<std::vector<ListItem>>();
    for (const auto& l : j.value("labels", nlohmann::json::array()))
      s.labels[{parse_side(l.at("side").get<std::string>()),
                l.at("position").get<std::size_t>()}] = l.at("grade").get<int>();
    return s;
  }
};

/// A label resolved through the hidden mapping.
struct ResolvedLabel {
  std::string session_id;
  std::string engine;
  std::string query_id;
  std::string doc_id;
  int grade = 0;
};

struct SessionRequest {
  std::string query;
  std::string engine_a;
  std::string engine_b;
  std::optional<std::uint64_t> seed;  // seeds the side coin
  std::optional<bool> force_swap;     // test hook; overrides the coin
  std::optional<std::string> query_id;
  std::optional<int> max_grade;
};

/// Produces the top results an engine returns for a query.
using EngineRunner = std::function<std::vector<ListItem>(
    const std::string& engine, const std::string& query, std::size_t k)>;

/// The fair coin for a seeded session: the top bit of the first draw.
inline bool seeded_swap(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return (rng() >> 63) != 0;
}

class AnnotationService {
 public:
  struct Options {
    std::filesystem::path store;  // empty: in-memory only
    int default_max_grade = 2;
    std::size_t compact_every = 1000;  // label records between compactions
  };

  AnnotationService(EngineRunner runner, Options opts)
      : runner_(std::move(runner)),
        opts_(std::move(opts)),
        coin_(std::random_device{}()),
        ids_(std::random_device{}()) {
    if (!opts_.store.empty()) replay();
  }

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  nlohmann::json create_session(const SessionRequest& req) {
    if (req.query.find_first_not_of(" \t\r\n") == std::string::npos)
      throw RequestError(400, "query must not be empty");
    if (req.engine_a.empty() || req.engine_b.empty())
      throw RequestError(400, "both engines must be named");
    const int max_grade = req.max_grade.value_or(opts_.default_max_grade);
    if (max_grade < 1) throw RequestError(400, "max_grade must be >= 1");

    AnnotationSession s;
    std::vector<ListItem> list_a, list_b;
    try {
      list_a = runner_(req.engine_a, req.query, AnnotationSession::kListSize);
      list_b = runner_(req.engine_b, req.query, AnnotationSession::kListSize);
    } catch (const RequestError&) {
      throw;
    } catch (const std::exception& e) {
      throw RequestError(503, std::string("engine fetch failed: ") + e.what());
    }
    if (list_a.size() > AnnotationSession::kListSize) list_a.resize(AnnotationSession::kListSize);
    if (list_b.size() > AnnotationSession::kListSize) list_b.resize(AnnotationSession::kListSize);

    std::lock_guard lock(mu_);
    s.id = new_id_locked();
    s.query_id = req.query_id.value_or(s.id);
    s.query = req.query;
    s.engine_a = req.engine_a;
    s.engine_b = req.engine_b;
    if (req.force_swap) s.swap = *req.force_swap;
    else if (req.seed) s.swap = seeded_swap(*req.seed);
    else s.swap = (coin_() >> 63) != 0;
    s.max_grade = max_grade;
    s.left = s.swap ? std::move(list_b) : std::move(list_a);
    s.right = s.swap ? std::move(list_a) : std::move(list_b);
    append_locked({{"type", "session"}, {"session", s.to_record()}});
    auto view = s.client_view();
    sessions_.emplace(s.id, std::move(s));
    return view;
  }

  nlohmann::json session_view(const std::string& id) const {
    std::lock_guard lock(mu_);
    return find_locked(id).client_view();
  }

  /// Records (or overwrites) the grade of one position.
  ResolvedLabel submit_label(const std::string& id, Side side, std::size_t position,
                             int grade) {
    std::lock_guard lock(mu_);
    auto& s = find_locked(id);
    const auto& list = s.items(side);
    if (position < 1 || position > list.size())
      throw RequestError(400, "position must be in [1," + std::to_string(list.size()) + "]");
    if (grade < 0 || grade > s.max_grade)
      throw RequestError(400, "grade must be in [0," + std::to_string(s.max_grade) + "]");
    s.labels[{side, position}] = grade;
    ResolvedLabel r{s.id, s.engine_for(side), s.query_id, list[position - 1].doc_id, grade};
    append_locked({{"type", "label"},
                   {"session_id", s.id},
                   {"side", to_string(side)},
                   {"position", position},
                   {"grade", grade},
                   {"engine", r.engine},
                   {"query_id", r.query_id},
                   {"doc_id", r.doc_id}});
    if (opts_.compact_every > 0 && ++labels_since_compaction_ >= opts_.compact_every)
      compact_locked();
    return r;
  }

  /// Every label of `engine`, latest grade per (query, document).
  eval::Qrels judgments(const std::string& engine) const {
    std::lock_guard lock(mu_);
    eval::Qrels qrels;
    for (const auto& id : order_) {
      const auto& s = sessions_.at(id);
      for (const auto& [key, grade] : s.labels) {
        if (s.engine_for(key.first) != engine) continue;
        qrels[s.query_id][s.items(key.first)[key.second - 1].doc_id] = grade;
      }
    }
    return qrels;
  }

  /// The lists `engine` produced, as a run (rank = position).
  eval::Run runs(const std::string& engine) const {
    std::lock_guard lock(mu_);
    eval::Run run;
    for (const auto& id : order_) {
      const auto& s = sessions_.at(id);
      const auto* list = s.list_of(engine);
      if (list == nullptr) continue;
      auto& entries = run[s.query_id];
      entries.clear();
      for (std::size_t i = 0; i < list->size(); ++i)
        entries.push_back({s.query_id, (*list)[i].doc_id, i + 1,
                           static_cast<double>(list->size() - i), engine});
    }
    return run;
  }

  std::string export_qrels(const std::string& engine) const {
    std::ostringstream out;
    eval::write_qrels(out, judgments(engine));
    return out.str();
  }

  std::string export_run(const std::string& engine) const {
    std::ostringstream out;
    eval::write_run(out, runs(engine));
    return out.str();
  }

  std::vector<std::string> engines() const {
    std::lock_guard lock(mu_);
    std::set<std::string> names;
    for (const auto& [_, s] : sessions_) {
      names.insert(s.engine_a);
      names.insert(s.engine_b);
    }
    return {names.begin(), names.end()};
  }

  std::size_t session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

  /// Rewrites the log as one record per session with its labels folded in.
  void compact() {
    std::lock_guard lock(mu_);
    compact_locked();
  }

 private:
  AnnotationSession& find_locked(const std::string& id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw RequestError(404, "unknown session " + id);
    return it->second;
  }
  const AnnotationSession& find_locked(const std::string& id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw RequestError(404, "unknown session " + id);
    return it->second;
  }

  std::string new_id_locked() {
    for (;;) {
      char buf[33];
      std::snprintf(buf, sizeof buf, "%016llx%016llx",
                    static_cast<unsigned long long>(ids_()),
                    static_cast<unsigned long long>(ids_()));
      if (!sessions_.contains(buf)) return buf;
    }
  }

  void append_locked(const nlohmann::json& record) {
    if (record.at("type") == "session") order_.push_back(record["session"]["id"]);
    if (opts_.store.empty()) return;
    std::ofstream out(opts_.store, std::ios::app);
    out << record.dump() << '\n';
    out.flush();
    if (!out) throw Error("failed to append to judgment store " + opts_.store.string());
  }

  void replay() {
    std::ifstream in(opts_.store);
    if (!in) return;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        // A torn final line from a crash mid-append is dropped.
        if (in.peek() == EOF) break;
        throw ParseError(lineno, "corrupt judgment store record");
      }
      const auto type = rec.at("type").get<std::string>();
      if (type == "session") {
        auto s = AnnotationSession::from_record(rec.at("session"));
        if (!sessions_.contains(s.id)) order_.push_back(s.id);
        sessions_[s.id] = std::move(s);
      } else if (type == "label") {
        auto it = sessions_.find(rec.at("session_id").get<std::string>());
        if (it == sessions_.end()) throw ParseError(lineno, "label for unknown session");
        it->second.labels[{parse_side(rec.at("side").get<std::string>()),
                           rec.at("position").get<std::size_t>()}] =
            rec.at("grade").get<int>();
      }
    }
  }

  void compact_locked() {
    labels_since_compaction_ = 0;
    if (opts_.store.empty()) return;
    auto tmp = opts_.store;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      for (const auto& id : order_)
        out << nlohmann::json{{"type", "session"}, {"session", sessions_.at(id).to_record()}}.dump()
            << '\n';
      out.flush();
      if (!out) throw Error("failed to compact judgment store");
    }
    std::filesystem::rename(tmp, opts_.store);
  }

  EngineRunner runner_;
  Options opts_;
  mutable std::mutex mu_;
  std::mt19937_64 coin_;
  std::mt19937_64 ids_;
  std::map<std::string, AnnotationSession> sessions_;
  std::vector<std::string> order_;  // creation order
  std::size_t labels_since_compaction_ = 0;
};

}  // namespace nsx
