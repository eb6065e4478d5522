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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "soplab/pathfind.hpp"
#include "soplab/registry.hpp"
#include "soplab/text.hpp"

namespace soplab {

// Outcome classes, in precedence order: the first failing check wins.
enum class OutcomeClass : std::uint8_t {
  kSuccess = 0,
  kNonShortest = 1,
  kNotReached = 2,
  kInvalidMove = 3,
  kMalformed = 4,
};

inline constexpr std::size_t kOutcomeClassCount = 5;
inline constexpr std::array<OutcomeClass, kOutcomeClassCount> kAllOutcomeClasses = {
    OutcomeClass::kSuccess, OutcomeClass::kNonShortest, OutcomeClass::kNotReached,
    OutcomeClass::kInvalidMove, OutcomeClass::kMalformed};

std::string_view to_string(OutcomeClass c) noexcept;
std::optional<OutcomeClass> outcome_from_string(std::string_view s) noexcept;

struct VerificationResult {
  OutcomeClass outcome = OutcomeClass::kMalformed;
  int reward = 0;                          // 1 iff outcome == kSuccess
  std::optional<int> generated_length;     // number of moves, when parseable
  std::optional<int> shortest_length;      // absent if the query itself is bad
  bool trailing_tokens = false;            // tokens after '</s>' were ignored

  friend bool operator==(const VerificationResult&, const VerificationResult&) = default;
};

// Classifies the continuation generated after the prompt `<s> i j :`. The
// completion may or may not carry a trailing `</s>`. Total: any token
// sequence maps to exactly one class. When a cache is supplied, distances
// come from it; the result is identical either way.
VerificationResult verify_completion(const GridMap& map, const PathQuery& query,
                                     std::span<const std::string_view> completion,
                                     DistanceCache* cache = nullptr);
VerificationResult verify_completion(const GridMap& map, const PathQuery& query,
                                     std::string_view completion,
                                     DistanceCache* cache = nullptr);

// Token-level entry used by the batch tool and the reward service: resolves
// the map and endpoint tokens, producing Malformed for anything unknown.
VerificationResult verify_tokens(const MapRegistry& registry, std::string_view map_id,
                                 std::string_view start_token, std::string_view end_token,
                                 std::string_view completion, DistanceCache* cache = nullptr);

struct BatchSummary {
  std::size_t total = 0;
  std::array<std::size_t, kOutcomeClassCount> by_class{};
  // Keyed by shortest length (-1 when unknown), or by group index when
  // groups were supplied (-1 for lengths outside every group).
  std::map<int, std::array<std::size_t, kOutcomeClassCount>> by_group;
};

struct BatchOutput {
  std::vector<VerificationResult> results;
  BatchSummary summary;
};

// Input lines: map_id<TAB>start_token<TAB>end_token<TAB>completion tokens.
// A bad line yields a Malformed result and processing continues.
BatchOutput batch_verify(const MapRegistry& registry, std::istream& input,
                         DistanceCache* cache = nullptr,
                         const std::vector<LengthGroup>& groups = {});

// {"idx", "class", "reward", "gen_len", "shortest_len"}
std::string result_to_ndjson(std::size_t idx, const VerificationResult& r);
// Parses one results line; throws FormatError.
VerificationResult result_from_ndjson(std::string_view line, std::size_t* idx = nullptr);

}  // namespace soplab
