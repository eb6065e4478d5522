// Copyright 2026 The soplab Authors
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

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace soplab {

// SplitMix64 finalizer. Used to derive independent RNG streams from a master
// seed plus any number of integer keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename... Keys>
constexpr std::uint64_t derive_seed(std::uint64_t master, Keys... keys) noexcept {
  std::uint64_t s = mix64(master);
  ((s = mix64(s ^ static_cast<std::uint64_t>(keys))), ...);
  return s;
}

// Stream tags, so that streams used for different purposes never collide.
enum class StreamTag : std::uint64_t {
  kMapTree = 1,
  kMapRetain,
  kSplit,
  kCoverage,
  kEndpoints,
  kQuestionOrder,
  kExtraQuestions,
  kAnswers,
  kWalk,
  kEvalGroup,
  kAugment,
  kDecompose,
};

// Portable random stream. The standard distributions are implementation
// defined, so every draw used for generated artifacts goes through the
// helpers below to keep files byte-identical across toolchains.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  template <typename... Keys>
  static Rng stream(std::uint64_t master, StreamTag tag, Keys... keys) {
    return Rng(derive_seed(master, static_cast<std::uint64_t>(tag), keys...));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection on the top of the range keeps the draw exactly uniform.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x > limit);
    return x % bound;
  }

  unsigned __int128 below(unsigned __int128 bound) {
    if (bound >> 64 == 0) return below(static_cast<std::uint64_t>(bound));
    const unsigned __int128 max = ~static_cast<unsigned __int128>(0);
    const unsigned __int128 limit = max - (max % bound + 1) % bound;
    unsigned __int128 x;
    do {
      x = (static_cast<unsigned __int128>(next()) << 64) | next();
    } while (x > limit);
    return x % bound;
  }

  // Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform double in [0, 1) with 53 bits of resolution.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(static_cast<std::uint64_t>(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Round-half-up for all fractional counts.
inline std::int64_t round_half_up(double x) {
  return static_cast<std::int64_t>(std::floor(x + 0.5));
}

}  // namespace soplab
