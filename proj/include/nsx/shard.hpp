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
#include <exception>
#include <future>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsx/error.hpp"
#include "nsx/scorer.hpp"
#include "nsx/scoring_pool.hpp"

namespace nsx {

struct ShardRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const ShardRange&, const ShardRange&) = default;
};

/// Contiguous, order-preserving partition of [0, n) into `shard_count`
/// ranges whose sizes differ by at most one (larger shards first). Shards are
/// empty when n < shard_count.
struct ShardPlan {
  std::size_t shard_count = 0;
  std::vector<ShardRange> shards;

  static ShardPlan make(std::size_t n, std::size_t shard_count) {
    if (shard_count == 0) throw InvalidArgument("shard count must be >= 1");
    ShardPlan plan;
    plan.shard_count = shard_count;
    const std::size_t base = n / shard_count;
    const std::size_t extra = n % shard_count;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < shard_count; ++i) {
      const std::size_t len = base + (i < extra ? 1 : 0);
      plan.shards.push_back({begin, begin + len});
      begin += len;
    }
    return plan;
  }
};

/// Scores `texts` as `shard_count` concurrent pool requests and stitches the
/// results back in order. `context` should be prepared from the full batch.
inline std::vector<double> shard_dispatch(
    ScoringPool& pool, std::string_view query, std::span<const std::string> texts,
    std::size_t shard_count,
    std::shared_ptr<const ScoringContext> context = nullptr) {
  const auto plan = ShardPlan::make(texts.size(), shard_count);
  std::vector<std::future<ShardResult>> pending;
  std::vector<ShardRange> ranges;
  for (std::size_t i = 0; i < plan.shards.size(); ++i) {
    const auto range = plan.shards[i];
    if (range.size() == 0) continue;
    ShardRequest req;
    req.shard = i;
    req.query = std::string(query);
    req.texts.assign(texts.begin() + static_cast<long>(range.begin),
                     texts.begin() + static_cast<long>(range.end));
    req.context = context;
    ranges.push_back(range);
    pending.push_back(std::async(std::launch::async,
                                 [&pool, r = std::move(req)] { return pool.submit(r); }));
  }

  std::vector<double> scores(texts.size());
  std::exception_ptr first_error;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    try {
      auto result = pending[i].get();
      std::copy(result.scores.begin(), result.scores.end(),
                scores.begin() + static_cast<long>(ranges[i].begin));
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return scores;
}

/// A Scorer that fans each batch out over a pool. Batch statistics are
/// prepared once from the whole batch so the result matches unsharded
/// scoring exactly.
class ShardedScorer final : public Scorer {
 public:
  ShardedScorer(std::shared_ptr<ScoringPool> pool, std::size_t shard_count)
      : pool_(std::move(pool)), shard_count_(shard_count) {
    if (!pool_) throw InvalidArgument("null scoring pool");
    if (shard_count_ == 0) throw InvalidArgument("shard count must be >= 1");
  }

  std::string name() const override {
    return pool_->model().name() + "x" + std::to_string(shard_count_);
  }

  std::shared_ptr<const ScoringContext> prepare(
      std::string_view query, std::span<const std::string> texts) const override {
    return pool_->model().prepare(query, texts);
  }

  std::vector<double> score(std::string_view query,
                            std::span<const std::string> texts,
                            const ScoringContext* context) const override {
    std::shared_ptr<const ScoringContext> ctx;
    if (context != nullptr) {
      // Non-owning alias; the caller keeps the context alive for this call.
      ctx = std::shared_ptr<const ScoringContext>(std::shared_ptr<void>{}, context);
    } else {
      ctx = prepare(query, texts);
    }
    return shard_dispatch(*pool_, query, texts, shard_count_, ctx);
  }

  ScoringPool& pool() const noexcept { return *pool_; }
  std::size_t shard_count() const noexcept { return shard_count_; }

 private:
  std::shared_ptr<ScoringPool> pool_;
  std::size_t shard_count_;
};

}  // namespace nsx
