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

// A pool of scoring workers that may be evicted at any time.
//
// Requests are routed round-robin over ready workers. When a worker is evicted
// mid-request the request is retried on another ready worker, and if a
// replacement factory is configured a new worker starts warming up at once.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsx/error.hpp"
#include "nsx/scorer.hpp"

namespace nsx {

enum class WorkerStatus { kStarting, kReady, kEvicted };

inline const char* to_string(WorkerStatus s) {
  switch (s) {
    case WorkerStatus::kStarting: return "starting";
    case WorkerStatus::kReady: return "ready";
    case WorkerStatus::kEvicted: return "evicted";
  }
  return "unknown";
}

struct ShardRequest {
  std::size_t shard = 0;
  std::string query;
  std::vector<std::string> texts;
  std::shared_ptr<const ScoringContext> context;
};

struct ShardResult {
  std::size_t shard = 0;
  std::vector<double> scores;
  std::uint64_t worker = 0;
  std::size_t attempts = 0;
};

/// No ready worker could take the request.
class PoolUnavailable : public ScoringError {
 public:
  PoolUnavailable(const std::string& what, std::size_t shard,
                  std::optional<std::chrono::milliseconds> wait_hint)
      : ScoringError(what, true, shard), wait_hint_(wait_hint) {}

  /// Time until the next starting worker is expected to be ready, if any.
  std::optional<std::chrono::milliseconds> wait_hint() const noexcept {
    return wait_hint_;
  }

 private:
  std::optional<std::chrono::milliseconds> wait_hint_;
};

class ScoringPool {
 public:
  using Clock = std::chrono::steady_clock;
  using ScorerFactory = std::function<std::shared_ptr<const Scorer>()>;

  struct Options {
    std::size_t retry_budget = 2;  // attempts per request
    ScorerFactory replacement;      // empty: evicted workers are not replaced
    std::chrono::milliseconds startup_delay{0};
  };

  struct WorkerInfo {
    std::uint64_t id = 0;
    WorkerStatus status = WorkerStatus::kReady;
    std::size_t served = 0;
  };

  explicit ScoringPool(std::vector<std::shared_ptr<const Scorer>> workers)
      : ScoringPool(std::move(workers), Options{}) {}

  ScoringPool(std::vector<std::shared_ptr<const Scorer>> workers, Options opts)
      : opts_(std::move(opts)) {
    if (workers.empty()) throw InvalidArgument("pool needs at least one worker");
    if (opts_.retry_budget == 0) throw InvalidArgument("retry budget must be >= 1");
    prototype_ = workers.front();
    for (auto& w : workers) add_locked(std::move(w), WorkerStatus::kReady, {});
  }

  ScoringPool(const ScoringPool&) = delete;
  ScoringPool& operator=(const ScoringPool&) = delete;

  /// Workers are homogeneous, so any of them can derive batch statistics.
  const Scorer& model() const noexcept { return *prototype_; }

  ShardResult submit(const ShardRequest& req) {
    std::set<std::uint64_t> tried;
    std::string last_error = "no attempt made";
    for (std::size_t attempt = 1; attempt <= opts_.retry_budget; ++attempt) {
      auto pick = acquire(tried);
      if (!pick) {
        throw PoolUnavailable(
            "no ready worker (after " + std::to_string(attempt - 1) +
                " attempts; last error: " + last_error + ")",
            req.shard, wait_hint());
      }
      tried.insert(pick->id);
      try {
        auto scores = pick->scorer->score(req.query, req.texts, req.context.get());
        if (scores.size() != req.texts.size())
          throw ScoringError("worker returned " + std::to_string(scores.size()) +
                                 " scores for " +
                                 std::to_string(req.texts.size()) + " texts",
                             true);
        record_served(pick->id);
        return {req.shard, std::move(scores), pick->id, attempt};
      } catch (const WorkerEvicted& e) {
        evict(pick->id);
        last_error = e.what();
      } catch (const ScoringError& e) {
        if (!e.retryable()) throw ScoringError(e.what(), false, req.shard);
        last_error = e.what();
      }
    }
    throw ScoringError("retry budget exhausted: " + last_error, true, req.shard);
  }

  /// Marks a worker evicted and, when configured, starts its replacement.
  void evict(std::uint64_t worker_id) {
    std::lock_guard lock(mu_);
    for (auto& w : workers_) {
      if (w.id != worker_id || w.status == WorkerStatus::kEvicted) continue;
      w.status = WorkerStatus::kEvicted;
      if (opts_.replacement) {
        add_locked(opts_.replacement(), WorkerStatus::kStarting,
                   Clock::now() + opts_.startup_delay);
      }
      return;
    }
  }

  std::uint64_t add_worker(std::shared_ptr<const Scorer> scorer) {
    std::lock_guard lock(mu_);
    return add_locked(std::move(scorer), WorkerStatus::kReady, {});
  }

  std::vector<WorkerInfo> workers() const {
    std::lock_guard lock(mu_);
    refresh_locked();
    std::vector<WorkerInfo> out;
    for (const auto& w : workers_) out.push_back({w.id, w.status, w.served});
    return out;
  }

  std::size_t ready_count() const {
    std::lock_guard lock(mu_);
    refresh_locked();
    std::size_t n = 0;
    for (const auto& w : workers_) n += w.status == WorkerStatus::kReady;
    return n;
  }

 private:
  struct Worker {
    std::uint64_t id;
    std::shared_ptr<const Scorer> scorer;
    mutable WorkerStatus status;
    Clock::time_point ready_at;
    std::size_t served = 0;
  };

  struct Pick {
    std::uint64_t id;
    std::shared_ptr<const Scorer> scorer;
  };

  std::uint64_t add_locked(std::shared_ptr<const Scorer> scorer,
                           WorkerStatus status, Clock::time_point ready_at) {
    if (!scorer) throw InvalidArgument("null worker scorer");
    const auto id = next_id_++;
    workers_.push_back({id, std::move(scorer), status, ready_at, 0});
    return id;
  }

  void refresh_locked() const {
    const auto now = Clock::now();
    for (const auto& w : workers_)
      if (w.status == WorkerStatus::kStarting && now >= w.ready_at)
        w.status = WorkerStatus::kReady;
  }

  // Round-robin over ready workers, preferring ones this request has not
  // tried yet.
  std::optional<Pick> acquire(const std::set<std::uint64_t>& tried) {
    std::lock_guard lock(mu_);
    refresh_locked();
    const std::size_t n = workers_.size();
    for (const bool allow_tried : {false, true}) {
      for (std::size_t step = 0; step < n; ++step) {
        const std::size_t i = (cursor_ + step) % n;
        const auto& w = workers_[i];
        if (w.status != WorkerStatus::kReady) continue;
        if (!allow_tried && tried.contains(w.id)) continue;
        cursor_ = (i + 1) % n;
        return Pick{w.id, w.scorer};
      }
    }
    return std::nullopt;
  }

  void record_served(std::uint64_t id) {
    std::lock_guard lock(mu_);
    for (auto& w : workers_)
      if (w.id == id) ++w.served;
  }

  std::optional<std::chrono::milliseconds> wait_hint() const {
    std::lock_guard lock(mu_);
    std::optional<Clock::time_point> soonest;
    for (const auto& w : workers_)
      if (w.status == WorkerStatus::kStarting && (!soonest || w.ready_at < *soonest))
        soonest = w.ready_at;
    if (!soonest) return std::nullopt;
    return std::chrono::duration_cast<std::chrono::milliseconds>(
        std::max(Clock::duration::zero(), *soonest - Clock::now()));
  }

  Options opts_;
  std::shared_ptr<const Scorer> prototype_;
  mutable std::mutex mu_;
  std::vector<Worker> workers_;
  std::size_t cursor_ = 0;
  std::uint64_t next_id_ = 0;
};

}  // namespace nsx
