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

// Discrete-event simulation of a fleet of preemptible scoring workers.
//
// Each evictable ready worker lives for an exponentially distributed time,
// then is evicted and immediately replaced by a worker that needs a uniformly
// distributed startup delay before it serves again.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <queue>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsx/error.hpp"

namespace nsx {

using Hours = std::chrono::duration<double, std::ratio<3600>>;

struct FleetSimConfig {
  std::size_t fleet_size = 10;
  /// Workers that are never evicted (hybrid reliable + spot fleets).
  std::size_t reliable_workers = 0;
  double eviction_rate_per_hour = 0.0;
  Hours startup_min{5.0 / 60.0};
  Hours startup_max{20.0 / 60.0};
  Hours horizon{90.0 * 24.0};
  std::uint64_t seed = 0;

  void validate() const {
    if (fleet_size == 0) throw InvalidArgument("fleet_size must be >= 1");
    if (reliable_workers > fleet_size)
      throw InvalidArgument("reliable_workers exceeds fleet_size");
    if (!(eviction_rate_per_hour >= 0))
      throw InvalidArgument("eviction rate must be >= 0");
    if (!(startup_min.count() > 0) || !(startup_max.count() > 0))
      throw InvalidArgument("startup delays must be positive");
    if (startup_min > startup_max)
      throw InvalidArgument("startup_min must not exceed startup_max");
    if (!(horizon.count() > 0)) throw InvalidArgument("horizon must be positive");
  }

  Hours mean_startup() const { return (startup_min + startup_max) / 2.0; }
};

struct CapacityStep {
  Hours start{0};
  double capacity = 1.0;  // ready workers / fleet size

  friend bool operator==(const CapacityStep&, const CapacityStep&) = default;
};

struct FleetSimReport {
  Hours horizon{0};
  std::vector<CapacityStep> timeline;  // step function; first step at t=0
  std::size_t eviction_count = 0;

  /// Duration of step i (the last step runs to the horizon).
  Hours step_length(std::size_t i) const {
    const Hours end = i + 1 < timeline.size() ? timeline[i + 1].start : horizon;
    return end - timeline[i].start;
  }

  /// Fraction of the horizon during which capacity was strictly below
  /// `threshold`.
  double fraction_of_time_below(double threshold) const {
    Hours below{0};
    for (std::size_t i = 0; i < timeline.size(); ++i)
      if (timeline[i].capacity < threshold) below += step_length(i);
    return below / horizon;
  }

  /// Time-weighted mean capacity.
  double mean_availability() const {
    double acc = 0;
    for (std::size_t i = 0; i < timeline.size(); ++i)
      acc += timeline[i].capacity * step_length(i).count();
    return acc / horizon.count();
  }

  double min_capacity() const {
    double m = 1.0;
    for (const auto& s : timeline) m = std::min(m, s.capacity);
    return m;
  }

  /// Number of separate episodes where capacity dropped below `threshold`.
  std::size_t episodes_below(double threshold) const {
    std::size_t n = 0;
    bool below = false;
    for (const auto& s : timeline) {
      const bool now = s.capacity < threshold;
      if (now && !below) ++n;
      below = now;
    }
    return n;
  }

  nlohmann::json to_json(const std::vector<double>& thresholds = {0.8}) const {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : timeline) steps.push_back({s.start.count(), s.capacity});
    nlohmann::json below = nlohmann::json::object();
    for (double t : thresholds) {
      char key[32];
      std::snprintf(key, sizeof key, "%g", t);
      below[key] = {{"fraction_of_time", fraction_of_time_below(t)},
                    {"episodes", episodes_below(t)}};
    }
    return {{"horizon_hours", horizon.count()},
            {"eviction_count", eviction_count},
            {"mean_availability", mean_availability()},
            {"min_capacity", min_capacity()},
            {"below", below},
            {"availability_timeline", steps}};
  }
};

inline FleetSimReport simulate_fleet(const FleetSimConfig& cfg) {
  cfg.validate();
  enum class Kind { kEvict, kReady };
  struct Event {
    double time;
    std::uint64_t seq;  // FIFO among simultaneous events
    Kind kind;
    bool operator>(const Event& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };

  std::mt19937_64 rng(cfg.seed);
  std::exponential_distribution<double> lifetime(
      cfg.eviction_rate_per_hour > 0 ? cfg.eviction_rate_per_hour : 1.0);
  std::uniform_real_distribution<double> startup(cfg.startup_min.count(),
                                                 cfg.startup_max.count());
  const double horizon = cfg.horizon.count();
  const double fleet = static_cast<double>(cfg.fleet_size);

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::uint64_t seq = 0;
  const bool evictions = cfg.eviction_rate_per_hour > 0;
  const std::size_t spot = cfg.fleet_size - cfg.reliable_workers;
  if (evictions)
    for (std::size_t w = 0; w < spot; ++w)
      events.push({lifetime(rng), seq++, Kind::kEvict});

  FleetSimReport report;
  report.horizon = cfg.horizon;
  report.timeline.push_back({Hours{0}, 1.0});
  std::size_t ready = cfg.fleet_size;
  while (!events.empty() && events.top().time < horizon) {
    const Event ev = events.top();
    events.pop();
    if (ev.kind == Kind::kEvict) {
      --ready;
      ++report.eviction_count;
      events.push({ev.time + startup(rng), seq++, Kind::kReady});
    } else {
      ++ready;
      events.push({ev.time + lifetime(rng), seq++, Kind::kEvict});
    }
    const double cap = static_cast<double>(ready) / fleet;
    auto& last = report.timeline.back();
    if (last.start.count() == ev.time) {
      last.capacity = cap;
    } else {
      report.timeline.push_back({Hours{ev.time}, cap});
    }
  }
  // Collapse steps that did not change capacity.
  std::vector<CapacityStep> compact;
  for (const auto& s : report.timeline)
    if (compact.empty() || compact.back().capacity != s.capacity)
      compact.push_back(s);
  report.timeline = std::move(compact);
  return report;
}

}  // namespace nsx
