// Copyright 2026 The airmarket Authors
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

// Seeded random draws that are reproducible across standard libraries: the
// engine is std::mt19937_64, whose output sequence the standard fixes, and
// the bounded draws below avoid the implementation-defined distributions.

#ifndef AIRMARKET_RANDOM_HPP_
#define AIRMARKET_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace airmarket {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Engine keyed by several integers (for example seed, agent, auction).
  Rng(std::initializer_list<std::uint64_t> key) : engine_(seq(key)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [lo, hi] by rejection, without modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return lo + static_cast<std::int64_t>(v % span);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::mt19937_64 seq(std::initializer_list<std::uint64_t> key) {
    std::vector<std::uint32_t> words;
    for (std::uint64_t k : key) {
      words.push_back(static_cast<std::uint32_t>(k));
      words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq s(words.begin(), words.end());
    return std::mt19937_64(s);
  }

  std::mt19937_64 engine_;
};

}  // namespace airmarket

#endif  // AIRMARKET_RANDOM_HPP_
