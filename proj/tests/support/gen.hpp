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

// Seeded random generators for property tests.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace nsx::gen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t size(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  template <typename T>
  const T& pick(const std::vector<T>& xs) {
    return xs[size(0, xs.size() - 1)];
  }

  template <typename T>
  void shuffle(std::vector<T>& xs) {
    std::shuffle(xs.begin(), xs.end(), rng_);
  }

  /// Lowercase word from a small alphabet so terms collide often.
  std::string word(std::size_t vocab = 30) {
    static const char* kSyllables[] = {"ka", "lo", "mi", "ne", "ru", "sa", "to", "vi"};
    const std::size_t id = size(0, vocab - 1);
    std::string w = kSyllables[id % 8];
    w += kSyllables[(id / 8) % 8];
    if (id >= 64) w += std::to_string(id);
    return w;
  }

  /// Word with random capitalization, digits or punctuation attached.
  std::string noisy_word(std::size_t vocab = 30) {
    std::string w = word(vocab);
    if (coin(0.2)) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (coin(0.1)) w += std::to_string(size(0, 9));
    if (coin(0.15)) w += pick(std::vector<std::string>{",", ";", ":", "-x", "'s"});
    return w;
  }

  std::string text(std::size_t words, std::size_t vocab = 30) {
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
      if (i > 0) out += separator();
      out += noisy_word(vocab);
    }
    return out;
  }

  /// Whitespace run, usually a single space.
  std::string separator() {
    const int r = integer(0, 19);
    if (r < 15) return " ";
    if (r < 17) return "  ";
    if (r < 18) return "\t";
    if (r < 19) return "\n";
    return " \n ";
  }

  /// Text made of sentences ending in . ! or ?.
  std::string prose(std::size_t sentences, std::size_t vocab = 30) {
    std::string out;
    for (std::size_t s = 0; s < sentences; ++s) {
      if (s > 0) out += separator();
      out += text(size(1, 12), vocab);
      out += pick(std::vector<std::string>{".", "!", "?", "."});
    }
    return out;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace nsx::gen
