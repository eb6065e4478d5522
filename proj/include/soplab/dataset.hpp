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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "soplab/pathfind.hpp"
#include "soplab/record.hpp"
#include "soplab/registry.hpp"
#include "soplab/text.hpp"

namespace soplab {

// Seeded partition of a map's nodes into a training region and a holdout
// region reserved for length-scaling evaluation.
struct NodeSplit {
  std::string map_id;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::vector<NodeId> train;    // ascending
  std::vector<NodeId> holdout;  // ascending
};

NodeSplit split_nodes(const GridMap& map, double train_fraction, std::uint64_t seed);
nlohmann::json split_to_json(const NodeSplit& split);
NodeSplit split_from_json(const nlohmann::json& j, const GridMap& map);

// questions-first spreads the budget over as many distinct questions as
// possible; fixed-answers gives every question `answers` solutions.
enum class Allocation { kQuestionsFirst, kFixedAnswers };
std::string_view to_string(Allocation a) noexcept;
std::optional<Allocation> allocation_from_string(std::string_view s) noexcept;

struct DatasetSpec {
  std::string map_id;
  double budget = 1.0;    // fraction of the candidate pool, in (0, 1]
  std::optional<std::size_t> records;  // absolute record count; overrides budget
  double coverage = 0.8;  // fraction of |V| allowed in questions, in (0, 1]
  int diversity = 1;      // endpoints per start node
  int answers = 1;        // solutions per question (fixed-answers only)
  int min_length = 1;
  int max_length = 20;
  Allocation allocation = Allocation::kQuestionsFirst;
  std::uint64_t seed = 0;
};

nlohmann::json spec_to_json(const DatasetSpec& spec);

struct DatasetMeasurement {
  std::size_t records = 0;
  std::size_t questions = 0;      // distinct (start, end) pairs
  std::size_t start_nodes = 0;
  std::size_t covered_nodes = 0;  // nodes appearing as start or end
  std::size_t duplicates = 0;     // repeated (query, path) lines
  double coverage = 0.0;          // covered_nodes / |V|
  double diversity = 0.0;         // questions / start_nodes
};

// Recomputes coverage and diversity from encoded lines. Throws FormatError
// on a line whose endpoint tokens do not belong to the map.
DatasetMeasurement measure_dataset(std::span<const std::string> lines, const GridMap& map);

struct DatasetManifest {
  DatasetSpec spec;
  std::size_t coverage_nodes = 0;  // round(c * |V|)
  std::size_t pool_size = 0;
  std::size_t target_records = 0;  // round(B * pool)
  DatasetMeasurement measured;
  bool coverage_attained = true;
  bool diversity_attained = true;
  // Why the spec could not be met exactly: "partners" (a start node has fewer
  // than d eligible endpoints), "budget" (fewer records than questions),
  // "solutions" (questions ran out of distinct shortest paths).
  std::vector<std::string> binding;
  std::vector<std::string> files;
  std::string digest;  // SHA-256 of the emitted file content
};

nlohmann::json manifest_to_json(const DatasetManifest& manifest);

struct Dataset {
  std::vector<Record> records;  // sorted by start, end, solution index
  std::vector<std::string> lines;
  DatasetManifest manifest;

  std::string content() const;  // lines joined, each newline-terminated
};

// Builds an SFT dataset under budget, coverage and diversity controls. Throws
// CapacityError naming the binding constraint when the spec is infeasible.
Dataset build_sft_dataset(const GridMap& map, const NodeSplit& split, const DatasetSpec& spec);

enum class WalkEncoding { kInterleaved, kNodesOnly };

struct PretrainSpec {
  std::size_t walks = 0;
  int min_length = 64;
  int max_length = 96;
  std::uint64_t seed = 0;
  WalkEncoding encoding = WalkEncoding::kInterleaved;
  std::optional<int> planned_sft_max_length;  // checked against min_length
};

struct PretrainSummary {
  std::size_t walks = 0;
  std::size_t tokens = 0;
  std::vector<std::string> warnings;
  std::string digest;
};

// `n E n N n ...` (interleaved) or `n n n ...` (nodes only).
std::string walk_line(const GridMap& map, const Walk& walk, WalkEncoding encoding);

// Streams one walk per line. Walk w runs on map w mod |maps| from a uniform
// start node with a uniform length in [min_length, max_length].
PretrainSummary write_pretrain_corpus(const MapRegistry& registry, const PretrainSpec& spec,
                                      std::ostream& out);

// Set of ordered (start, end) pairs.
class PairSupport {
 public:
  void insert(NodeId a, NodeId b) { keys_.insert(key(a, b)); }
  bool contains(NodeId a, NodeId b) const { return keys_.contains(key(a, b)); }
  std::size_t size() const noexcept { return keys_.size(); }

  static PairSupport from_records(std::span<const Record> records);

 private:
  static std::uint64_t key(NodeId a, NodeId b) {
    return (static_cast<std::uint64_t>(a.value) << 32) | b.value;
  }
  std::unordered_set<std::uint64_t> keys_;
};

struct EvalSetSpec {
  std::vector<LengthGroup> groups;
  std::size_t per_group = 3000;
  std::uint64_t seed = 0;
};

struct EvalGroupSet {
  LengthGroup group;
  std::vector<PathQuery> queries;  // sorted by start, end
  std::size_t available = 0;
  bool shortfall = false;  // fewer than per_group pairs exist
};

// With a split, both endpoints come from its holdout nodes (length scaling on
// the training map); without one, every node of the map is eligible
// (spatial transfer). Pairs in `exclude` are never emitted.
std::vector<EvalGroupSet> build_eval_sets(const GridMap& map, const NodeSplit* split,
                                          const EvalSetSpec& spec,
                                          const PairSupport* exclude = nullptr);

std::string query_to_tsv(const GridMap& map, const PathQuery& query);

// Appends round(fraction * records.size()) records per target length, each a
// new train-node question whose shortest distance is exactly the target.
std::vector<Record> augment_with_length(std::span<const Record> records, const GridMap& map,
                                        const NodeSplit& split, std::span<const int> targets,
                                        double fraction, std::uint64_t seed);

}  // namespace soplab
