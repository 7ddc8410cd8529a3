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

// Closed-loop load generator: each simulated user picks a random query, waits
// for the answer, thinks for a uniformly random time, and repeats until the
// test duration elapses.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsx/error.hpp"
#include "nsx/http.hpp"

namespace nsx {

using Seconds = std::chrono::duration<double>;

struct LoadTestConfig {
  std::size_t users = 1;
  Seconds duration{900};
  std::vector<std::string> queries;
  Seconds think_min{1};
  Seconds think_max{15};
  std::string target;  // URL of the search endpoint, e.g. http://host:8080/search
  std::uint64_t seed = 0;

  void validate() const {
    if (!(duration.count() > 0)) throw InvalidArgument("duration must be > 0");
    if (think_min.count() < 0 || think_min > think_max)
      throw InvalidArgument("think time must satisfy 0 <= min <= max");
    if (users > 0 && queries.empty())
      throw InvalidArgument("query set is empty");
  }
};

struct LatencyStats {
  double mean = 0;
  double min = 0;
  double max = 0;
  double p90 = 0;
};

struct LoadTestReport {
  double qps = 0;
  std::optional<LatencyStats> latency;  // absent when nothing succeeded
  std::size_t request_count = 0;
  std::size_t error_count = 0;
  Seconds duration{0};
  /// Queries in the order each user issued them, indexed by user.
  std::vector<std::vector<std::size_t>> query_log;
  /// Latencies of successful requests in seconds, ascending.
  std::vector<double> latencies;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"qps", qps},
                        {"request_count", request_count},
                        {"error_count", error_count},
                        {"duration_seconds", duration.count()}};
    if (latency) {
      j["latency"] = {{"mean", latency->mean},
                      {"min", latency->min},
                      {"max", latency->max},
                      {"p90", latency->p90}};
    } else {
      j["latency"] = nullptr;
    }
    return j;
  }

  /// "label: QPS 5.2, 90% 1.904, mean 1.385, min 0.502, max 9.430"
  std::string table_row(std::string_view label) const {
    char buf[256];
    if (latency) {
      std::snprintf(buf, sizeof buf,
                    "%.*s: QPS %.1f, 90%% %.3f, mean %.3f, min %.3f, max %.3f",
                    static_cast<int>(label.size()), label.data(), qps,
                    latency->p90, latency->mean, latency->min, latency->max);
    } else {
      std::snprintf(buf, sizeof buf, "%.*s: QPS %.1f, 90%% -, mean -, min -, max -",
                    static_cast<int>(label.size()), label.data(), qps);
    }
    return buf;
  }
};

/// Nearest-rank percentile: the smallest sample with at least p% of samples at
/// or below it. `sorted` must be ascending and non-empty.
inline double nearest_rank_percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("percentile of empty sample");
  auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

inline std::optional<LatencyStats> summarize_latencies(std::vector<double> samples) {
  if (samples.empty()) return std::nullopt;
  std::sort(samples.begin(), samples.end());
  LatencyStats s;
  s.min = samples.front();
  s.max = samples.back();
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
           static_cast<double>(samples.size());
  s.p90 = nearest_rank_percentile(samples, 90.0);
  return s;
}

/// Sends one query; returns false on a failed request.
using SendQuery = std::function<bool(std::string_view query)>;

/// Per-user generator seed derived from the run seed (splitmix64 finalizer).
inline std::uint64_t user_seed(std::uint64_t seed, std::size_t user) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (user + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline LoadTestReport run_loadtest(const LoadTestConfig& cfg, const SendQuery& send) {
  cfg.validate();
  using Clock = std::chrono::steady_clock;
  LoadTestReport report;
  report.duration = cfg.duration;
  report.query_log.resize(cfg.users);
  if (cfg.users == 0) return report;

  std::mutex mu;
  std::vector<double> latencies;
  std::size_t requests = 0;
  std::size_t errors = 0;

  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(cfg.duration);
  std::vector<std::thread> users;
  users.reserve(cfg.users);
  for (std::size_t u = 0; u < cfg.users; ++u) {
    users.emplace_back([&, u] {
      std::mt19937_64 rng(user_seed(cfg.seed, u));
      std::uniform_int_distribution<std::size_t> pick(0, cfg.queries.size() - 1);
      std::uniform_real_distribution<double> think(cfg.think_min.count(),
                                                   cfg.think_max.count());
      auto& log = report.query_log[u];
      while (Clock::now() < deadline) {
        const std::size_t q = pick(rng);
        log.push_back(q);
        const auto t0 = Clock::now();
        bool ok = false;
        try {
          ok = send(cfg.queries[q]);
        } catch (const std::exception&) {
          ok = false;
        }
        const double elapsed = Seconds(Clock::now() - t0).count();
        {
          std::lock_guard lock(mu);
          ++requests;
          if (ok) latencies.push_back(elapsed);
          else ++errors;
        }
        const auto wake =
            Clock::now() + std::chrono::duration_cast<Clock::duration>(
                               Seconds(think(rng)));
        std::this_thread::sleep_until(std::min(wake, deadline));
      }
    });
  }
  for (auto& t : users) t.join();

  report.request_count = requests;
  report.error_count = errors;
  report.qps = static_cast<double>(requests) / cfg.duration.count();
  std::sort(latencies.begin(), latencies.end());
  report.latency = summarize_latencies(latencies);
  report.latencies = std::move(latencies);
  return report;
}

/// Load test against an HTTP search endpoint: GET <target>?q=<query>.
/// Fails fast when the target does not accept connections.
inline LoadTestReport run_loadtest(const LoadTestConfig& cfg) {
  cfg.validate();
  const auto ep = parse_endpoint(cfg.target);
  const std::string path = ep.path_or("/search");
  {
    auto probe = make_client(ep, std::chrono::seconds(5));
    auto res = probe->Get("/healthz");
    if (!res)
      throw Error("load test target unreachable: " + cfg.target + " (" +
                  httplib::to_string(res.error()) + ")");
  }
  // One keep-alive connection per simulated user thread.
  std::mutex clients_mu;
  std::map<std::thread::id, std::unique_ptr<httplib::Client>> clients;
  const SendQuery send = [&](std::string_view query) {
    httplib::Client* client = nullptr;
    {
      std::lock_guard lock(clients_mu);
      auto& slot = clients[std::this_thread::get_id()];
      if (!slot) slot = make_client(ep, std::chrono::seconds(120));
      client = slot.get();
    }
    httplib::Params params{{"q", std::string(query)}};
    auto res = client->Get(path, params, httplib::Headers{});
    return res && res->status == 200;
  };
  return run_loadtest(cfg, send);
}

}  // namespace nsx
