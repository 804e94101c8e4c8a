// Copyright 2026 The mitrainer Authors
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

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace mitrainer {

/// Portable seeded draws. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the integer mapping below is ours
/// (the std distributions are implementation-defined), so a seed replays
/// identically on every toolchain.
class SeededDraws {
 public:
  explicit SeededDraws(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform over [lo, hi] by rejection: draws at or above the largest
  /// multiple of the span are discarded, then value = lo + draw % span.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
    // 2^64 mod span, computed without overflow.
    const std::uint64_t excess = (UINT64_MAX % span + 1) % span;
    const std::uint64_t limit = UINT64_MAX - excess;  // accept x <= limit
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (excess != 0 && x > limit);
    return static_cast<int>(lo + static_cast<std::int64_t>(x % span));
  }

  /// Fisher-Yates from the back, j = uniform_int(0, i).
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i - 1)));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Stable 64-bit seed derivation from a base seed, a label and a counter
/// (FNV-1a over the label, mixed with a splitmix64 finalizer).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view label,
                                    std::uint64_t counter) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = base ^ h ^ (counter * 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace mitrainer
