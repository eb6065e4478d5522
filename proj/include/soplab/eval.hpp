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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "soplab/pathfind.hpp"
#include "soplab/registry.hpp"
#include "soplab/text.hpp"
#include "soplab/verifier.hpp"

namespace soplab {

// ---------------------------------------------------------------------------
// Success rates

// One verified output, tagged with where it came from. map_id and method are
// optional labels carried through to reports.
struct EvalEntry {
  std::string map_id;
  std::string method;
  VerificationResult result;
};

// Reads verifier NDJSON. Lines may carry extra "map_id" / "method" keys.
// Throws FormatError naming the offending line.
std::vector<EvalEntry> read_results(std::istream& in);

struct GroupStats {
  LengthGroup group;
  std::size_t n = 0;
  std::array<std::size_t, kOutcomeClassCount> by_class{};
  std::optional<double> sr;  // nullopt when n == 0
};

// Groups by oracle shortest length. Results whose shortest length is unknown
// or outside every group are not counted.
std::vector<GroupStats> success_rate(std::span<const VerificationResult> results,
                                     const std::vector<LengthGroup>& groups);

// ---------------------------------------------------------------------------
// Decomposition

struct DecompositionQuery {
  std::size_t index = 0;  // position in the input list
  PathQuery long_query;
  NodeId midpoint;
  PathQuery sub1;
  PathQuery sub2;
  int length = 0;
  int sub1_length = 0;
  int sub2_length = 0;
};

struct DecompositionPlan {
  std::vector<DecompositionQuery> queries;
  std::vector<std::size_t> skipped;  // input positions whose distance exceeds 2 * max_length
};

// Splits one seeded reference shortest path per query at move floor(L/2).
DecompositionPlan make_decomposition_queries(const GridMap& map,
                                             std::span<const PathQuery> long_queries,
                                             int max_length, std::uint64_t seed);

struct OutcomeRow {
  int length = 0;
  bool long_success = false;
  bool sub1_success = false;
  bool sub2_success = false;
};

struct DecompositionBlock {
  LengthGroup group;
  std::size_t n = 0;
  std::optional<double> pr_long;
  std::optional<double> pr_sub;
  std::optional<double> pr_both;
  std::optional<double> pr_long_given_both;  // nullopt when no row solves both halves
  std::optional<double> pr_long_not_both;
};

// Law of total probability; a missing conditional contributes zero.
double compose_pr_long(std::optional<double> pr_long_given_both, double pr_both,
                       double pr_long_not_both) noexcept;

// One block per group. Throws ParameterError on an empty table.
std::vector<DecompositionBlock> decomposition_stats(std::span<const OutcomeRow> table,
                                                    const std::vector<LengthGroup>& groups);

// ---------------------------------------------------------------------------
// Inference-time selection

enum class SelectionStrategy : std::uint8_t { kGreedyFirst, kMajority, kShortest };

std::string_view to_string(SelectionStrategy s) noexcept;
std::optional<SelectionStrategy> strategy_from_string(std::string_view s) noexcept;

// Returns the chosen candidate index. When `eligible` is given, only those
// candidates compete; if none is eligible all of them do. Throws
// ParameterError for an empty candidate list.
std::size_t select_candidate(std::span<const std::string> candidates, SelectionStrategy strategy,
                             const std::vector<bool>* eligible = nullptr);

struct CandidateSet {
  std::string map_id;
  std::string start;
  std::string end;
  std::vector<std::string> candidates;  // index 0 is the greedy decode
};

CandidateSet candidate_set_from_json(std::string_view line);  // throws FormatError
std::string candidate_set_to_json(const CandidateSet& set);
std::vector<CandidateSet> read_candidate_sets(std::istream& in);

// ---------------------------------------------------------------------------
// Error distribution and reports

struct ErrorRow {
  std::string method;
  LengthGroup group;
  std::size_t errors = 0;  // non-Success rows
  std::size_t non_shortest = 0;
  std::size_t not_reached = 0;
  std::size_t invalid_move = 0;
  std::size_t malformed = 0;  // zero when folded

  double percent(std::size_t count) const noexcept {
    return errors == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(errors);
  }
};

// Rows ordered by method (first appearance), then group.
std::vector<ErrorRow> error_distribution(std::span<const EvalEntry> entries,
                                         const std::vector<LengthGroup>& groups,
                                         bool fold_malformed);

struct ReportRow {
  std::string map_id;
  std::string method;
  GroupStats stats;
};

struct EvalReport {
  std::vector<LengthGroup> groups;
  std::vector<ReportRow> rows;  // sorted by map_id, method, group
  std::size_t ungrouped = 0;
  std::vector<DecompositionBlock> decomposition;
};

EvalReport build_report(std::span<const EvalEntry> entries, const std::vector<LengthGroup>& groups);

nlohmann::ordered_json report_to_json(const EvalReport& report);
std::string success_rate_csv(const EvalReport& report);
std::string error_table_csv(const std::vector<ErrorRow>& rows, bool fold_malformed);
std::string decomposition_csv(const std::vector<DecompositionBlock>& blocks);

}  // namespace soplab
