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

#include "soplab/dataset.hpp"

#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "soplab/digest.hpp"
#include "soplab/error.hpp"
#include "soplab/record.hpp"
#include "soplab/verifier.hpp"

namespace soplab {
namespace {

VerificationResult reverify(const GridMap& m, const std::string& line) {
  // Strip "<s> i j :" and verify the answer part.
  const auto tok = split_tokens(line);
  const PathQuery q{m.map_id(), *m.node_from_token(tok[1]), *m.node_from_token(tok[2])};
  std::vector<std::string_view> answer(tok.begin() + 4, tok.end());
  return verify_completion(m, q, std::span<const std::string_view>(answer));
}

TEST(SplitTest, SizesPartitionAndDeterminism) {
  const GridMap m = generate_map(50, 40, 0.5, 1);
  const NodeSplit s = split_nodes(m, 0.8, 17);
  EXPECT_EQ(s.train.size(), 1600u);
  EXPECT_EQ(s.holdout.size(), 400u);
  std::set<NodeId> all(s.train.begin(), s.train.end());
  for (NodeId n : s.holdout) EXPECT_TRUE(all.insert(n).second);
  EXPECT_EQ(all.size(), 2000u);

  const NodeSplit again = split_nodes(m, 0.8, 17);
  EXPECT_EQ(again.train, s.train);
  EXPECT_NE(split_nodes(m, 0.8, 18).train, s.train);
  EXPECT_THROW(split_nodes(m, 1.0, 1), ParameterError);
  EXPECT_THROW(split_nodes(m, 0.0, 1), ParameterError);

  const NodeSplit back = split_from_json(split_to_json(s), m);
  EXPECT_EQ(back.train, s.train);
  EXPECT_EQ(back.holdout, s.holdout);
}

TEST(SftDatasetTest, BudgetsMatchPoolFractions) {
  const GridMap m = generate_map(12, 10, 0.5, 2);
  const NodeSplit split = split_nodes(m, 0.8, 2);
  for (double b : {0.05, 0.10, 0.20, 0.60, 0.80}) {
    DatasetSpec spec;
    spec.budget = b;
    spec.coverage = 0.8;
    spec.diversity = 200;
    spec.seed = 3;
    const Dataset ds = build_sft_dataset(m, split, spec);
    EXPECT_EQ(ds.records.size(),
              static_cast<std::size_t>(round_half_up(b * static_cast<double>(ds.manifest.pool_size))));
    EXPECT_EQ(ds.manifest.measured.duplicates, 0u);
    // Questions-first: as many distinct questions as records when budget binds.
    EXPECT_EQ(ds.manifest.measured.questions, ds.records.size());
  }
}

TEST(SftDatasetTest, DiversityFloor) {
  const GridMap m = generate_map(12, 10, 0.5, 2);
  const NodeSplit split = split_nodes(m, 0.8, 2);
  DatasetSpec spec;
  spec.budget = 0.3;
  spec.coverage = 0.5;
  spec.diversity = 1;
  const Dataset ds = build_sft_dataset(m, split, spec);
  std::map<NodeId, std::set<NodeId>> ends;
  for (const auto& r : ds.records) ends[r.query.start].insert(r.query.end);
  for (const auto& [s, e] : ends) EXPECT_EQ(e.size(), 1u);
  EXPECT_DOUBLE_EQ(ds.manifest.measured.diversity, 1.0);
}

TEST(SftDatasetTest, ToyFullGridControls) {
  const GridMap m = generate_map(8, 8, 0.0, 0);
  const NodeSplit split = split_nodes(m, 0.8, 1);
  DatasetSpec spec;
  spec.budget = 0.2;
  spec.coverage = 0.5;
  spec.diversity = 4;
  spec.answers = 1;
  spec.seed = 11;
  const Dataset ds = build_sft_dataset(m, split, spec);
  for (const auto& line : ds.lines) EXPECT_EQ(reverify(m, line).outcome, OutcomeClass::kSuccess);
  const auto measured = measure_dataset(ds.lines, m);
  EXPECT_LE(std::abs(static_cast<double>(measured.covered_nodes) - 0.5 * 64), 1.0);
  EXPECT_DOUBLE_EQ(measured.diversity, 4.0);
  EXPECT_TRUE(ds.manifest.diversity_attained);
  EXPECT_TRUE(ds.manifest.coverage_attained);
  EXPECT_EQ(measured.duplicates, 0u);
  // Records are canonically ordered.
  for (std::size_t t = 1; t < ds.records.size(); ++t) {
    const auto& a = ds.records[t - 1].query;
    const auto& b = ds.records[t].query;
    EXPECT_TRUE(std::tie(a.start, a.end) <= std::tie(b.start, b.end));
  }
}

TEST(SftDatasetTest, LengthBoundsRespected) {
  const GridMap m = generate_map(15, 12, 0.5, 9);
  const NodeSplit split = split_nodes(m, 0.8, 9);
  DatasetSpec spec;
  spec.budget = 0.5;
  spec.coverage = 0.6;
  spec.diversity = 8;
  spec.min_length = 4;
  spec.max_length = 9;
  const Dataset ds = build_sft_dataset(m, split, spec);
  ASSERT_FALSE(ds.records.empty());
  std::set<NodeId> train(split.train.begin(), split.train.end());
  for (const auto& r : ds.records) {
    EXPECT_GE(r.length(), 4u);
    EXPECT_LE(r.length(), 9u);
    EXPECT_TRUE(train.contains(r.query.start));
    EXPECT_TRUE(train.contains(r.query.end));
  }
}

TEST(SftDatasetTest, FixedAnswersAndFootnoteRule) {
  // Full grid: plenty of solutions, so every question gets exactly 3.
  const GridMap full = generate_map(10, 10, 0.0, 0);
  const NodeSplit split = split_nodes(full, 0.8, 1);
  DatasetSpec spec;
  spec.budget = 0.1;
  spec.coverage = 0.8;
  spec.diversity = 60;
  spec.answers = 3;
  spec.min_length = 3;
  spec.allocation = Allocation::kFixedAnswers;
  const Dataset ds = build_sft_dataset(full, split, spec);
  std::map<std::pair<NodeId, NodeId>, int> per_q;
  for (const auto& r : ds.records) ++per_q[{r.query.start, r.query.end}];
  int partial = 0;
  for (const auto& [q, n] : per_q) {
    const PathCount c = count_shortest_paths(full, q.first, q.second);
    partial += n != static_cast<int>(std::min<PathCount>(c, PathCount{3}).to_u64());
  }
  EXPECT_LE(partial, 1);  // only the last question may be cut by the budget
  EXPECT_EQ(ds.records.size(), ds.manifest.target_records);

  // Spanning tree: each question has one solution, so the leftover budget
  // flows to further questions.
  const GridMap tree = generate_map(10, 10, 1.0, 0);
  const NodeSplit tsplit = split_nodes(tree, 0.8, 1);
  spec.min_length = 1;
  const Dataset tds = build_sft_dataset(tree, tsplit, spec);
  EXPECT_EQ(tds.records.size(), tds.manifest.target_records);
  EXPECT_EQ(tds.manifest.measured.questions, tds.records.size());
  EXPECT_EQ(tds.manifest.measured.duplicates, 0u);
}

TEST(SftDatasetTest, SolutionsExhaustedSpillToNewQuestions) {
  const GridMap tree = generate_map(10, 8, 1.0, 3);
  const NodeSplit split = split_nodes(tree, 0.8, 1);
  DatasetSpec spec;
  spec.budget = 0.6;
  spec.coverage = 0.5;
  spec.diversity = 1;
  const Dataset ds = build_sft_dataset(tree, split, spec);
  EXPECT_EQ(ds.records.size(), ds.manifest.target_records);
  EXPECT_FALSE(ds.manifest.diversity_attained);
  EXPECT_NE(std::find(ds.manifest.binding.begin(), ds.manifest.binding.end(), "solutions"),
            ds.manifest.binding.end());
  EXPECT_EQ(ds.manifest.measured.duplicates, 0u);
}

TEST(SftDatasetTest, InfeasibleSpecsNameTheConstraint) {
  const GridMap m = generate_map(6, 6, 0.5, 1);
  const NodeSplit split = split_nodes(m, 0.8, 1);
  DatasetSpec spec;
  spec.coverage = 0.95;
  try {
    build_sft_dataset(m, split, spec);
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("training nodes"), std::string::npos);
  }
  spec.coverage = 0.5;
  spec.min_length = 100;
  spec.max_length = 120;
  try {
    build_sft_dataset(m, split, spec);
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("pool is empty"), std::string::npos);
  }
  spec.min_length = 1;
  spec.max_length = 20;
  spec.budget = 0.0;
  EXPECT_THROW(build_sft_dataset(m, split, spec), ParameterError);
  spec.budget = 0.001;
  EXPECT_THROW(build_sft_dataset(m, split, spec), CapacityError);
}

TEST(SftDatasetTest, DeterministicContent) {
  const GridMap m = generate_map(14, 12, 0.5, 4);
  const NodeSplit split = split_nodes(m, 0.8, 4);
  DatasetSpec spec;
  spec.budget = 0.2;
  spec.coverage = 0.4;
  spec.diversity = 4;
  spec.seed = 5;
  const Dataset a = build_sft_dataset(m, split, spec);
  const Dataset b = build_sft_dataset(m, split, spec);
  EXPECT_EQ(a.content(), b.content());
  EXPECT_EQ(a.manifest.digest, b.manifest.digest);
  spec.seed = 6;
  EXPECT_NE(build_sft_dataset(m, split, spec).content(), a.content());
}

TEST(SftDatasetTest, FixedTotalAcrossCoverageDiversity) {
  // With budget pinned to an absolute count, the emitted total is identical
  // across (c, d) settings.
  const GridMap m = generate_map(16, 12, 0.5, 8);
  const NodeSplit split = split_nodes(m, 0.8, 8);
  std::set<std::size_t> totals;
  for (double c : {0.3, 0.5, 0.7}) {
    for (int d : {2, 8}) {
      DatasetSpec probe;
      probe.coverage = c;
      probe.diversity = d;
      probe.budget = 1.0;
      const Dataset full = build_sft_dataset(m, split, probe);
      probe.budget = 400.0 / static_cast<double>(full.manifest.pool_size);
      const Dataset ds = build_sft_dataset(m, split, probe);
      totals.insert(ds.records.size());
    }
  }
  EXPECT_EQ(totals.size(), 1u);
  EXPECT_EQ(*totals.begin(), 400u);
}

TEST(PretrainTest, EncodingArithmeticAndNoPromptPattern) {
  MapRegistry reg;
  reg.add(generate_map(8, 8, 0.5, 1, 0));
  reg.add(generate_map(6, 9, 0.5, 2, 1));
  PretrainSpec spec;
  spec.walks = 200;
  spec.min_length = 64;
  spec.max_length = 96;
  spec.seed = 3;
  spec.planned_sft_max_length = 20;
  std::ostringstream out;
  const auto summary = write_pretrain_corpus(reg, spec, out);
  EXPECT_TRUE(summary.warnings.empty());
  std::istringstream in(out.str());
  std::string line;
  std::size_t n = 0, tokens = 0;
  while (std::getline(in, line)) {
    const auto tok = split_tokens(line);
    ASSERT_EQ(tok.size() % 2, 1u);
    const std::size_t steps = (tok.size() - 1) / 2;
    EXPECT_GE(steps, 64u);
    EXPECT_LE(steps, 96u);
    const GridMap& m = *reg.maps()[n % 2];
    for (std::size_t k = 0; k < tok.size(); ++k) {
      EXPECT_NE(tok[k], ":");
      EXPECT_NE(tok[k], "<s>");
      if (k % 2 == 0) {
        EXPECT_TRUE(m.node_from_token(tok[k]));
      } else {
        const auto d = direction_from_token(tok[k]);
        ASSERT_TRUE(d);
        EXPECT_EQ(m.apply_move(*m.node_from_token(tok[k - 1]), *d).target,
                  *m.node_from_token(tok[k + 1]));
      }
    }
    tokens += tok.size();
    ++n;
  }
  EXPECT_EQ(n, 200u);
  EXPECT_EQ(tokens, summary.tokens);
  EXPECT_EQ(summary.digest, sha256_hex(out.str()));
}

TEST(PretrainTest, WarnsAndNodesOnly) {
  MapRegistry reg;
  reg.add(generate_map(5, 5, 0.5, 1, 0));
  PretrainSpec spec;
  spec.walks = 10;
  spec.min_length = 10;
  spec.max_length = 10;
  spec.planned_sft_max_length = 20;
  spec.encoding = WalkEncoding::kNodesOnly;
  std::ostringstream out;
  const auto summary = write_pretrain_corpus(reg, spec, out);
  EXPECT_EQ(summary.warnings.size(), 1u);
  std::istringstream in(out.str());
  std::string line;
  while (std::getline(in, line)) EXPECT_EQ(split_tokens(line).size(), 11u);
  spec.min_length = 20;
  spec.max_length = 10;
  EXPECT_THROW(write_pretrain_corpus(reg, spec, out), ParameterError);
}

TEST(EvalSetTest, LengthScalingGroupsOnHoldout) {
  const GridMap m = generate_map(30, 24, 0.5, 6);
  const NodeSplit split = split_nodes(m, 0.8, 6);
  DatasetSpec spec;
  spec.budget = 0.2;
  spec.coverage = 0.8;
  spec.diversity = 16;
  spec.max_length = 20;
  const Dataset train = build_sft_dataset(m, split, spec);
  const PairSupport support = PairSupport::from_records(train.records);
  const auto sets = build_eval_sets(m, &split, {parse_length_groups("20-30,30-40"), 100, 1}, &support);
  ASSERT_EQ(sets.size(), 2u);
  std::set<NodeId> holdout(split.holdout.begin(), split.holdout.end());
  std::size_t max_train = 0;
  for (const auto& r : train.records) max_train = std::max(max_train, r.length());
  for (const auto& set : sets) {
    EXPECT_FALSE(set.queries.empty());
    for (const auto& q : set.queries) {
      const int d = *shortest_distance(m, q.start, q.end);
      EXPECT_TRUE(set.group.contains(d));
      EXPECT_GT(static_cast<std::size_t>(d), max_train);
      EXPECT_TRUE(holdout.contains(q.start) && holdout.contains(q.end));
      EXPECT_FALSE(support.contains(q.start, q.end));
    }
  }
}

TEST(EvalSetTest, ExclusionAndBruteForceDistances) {
  const GridMap m = generate_map(10, 10, 0.5, 3);
  const auto fw = oracle::floyd_warshall(m);
  const auto sets = build_eval_sets(m, nullptr, {parse_length_groups("5-10"), 200, 2});
  ASSERT_EQ(sets[0].queries.size(), 200u);
  PairSupport half;
  for (std::size_t k = 0; k < sets[0].queries.size(); k += 2) {
    const auto& q = sets[0].queries[k];
    half.insert(q.start, q.end);
  }
  for (const auto& q : sets[0].queries) {
    const int d = fw[q.start.value][q.end.value];
    EXPECT_GT(d, 5);
    EXPECT_LE(d, 10);
  }
  const auto again = build_eval_sets(m, nullptr, {parse_length_groups("5-10"), 200, 2}, &half);
  for (const auto& q : again[0].queries) EXPECT_FALSE(half.contains(q.start, q.end));
  EXPECT_EQ(again[0].available, sets[0].available - half.size());
}

TEST(EvalSetTest, ShortfallIsFlagged) {
  const GridMap m = generate_map(4, 4, 0.0, 0);
  const auto sets = build_eval_sets(m, nullptr, {parse_length_groups("4-5,5-6"), 1000, 1});
  EXPECT_TRUE(sets[0].shortfall);
  EXPECT_EQ(sets[0].queries.size(), sets[0].available);
  EXPECT_EQ(sets[1].queries.size(), 4u);  // the two corner diagonals, both ways
  EXPECT_TRUE(sets[1].shortfall);
}

TEST(AugmentTest, ExactLengthsAndCounts) {
  const GridMap m = generate_map(30, 24, 0.4, 12);
  const NodeSplit split = split_nodes(m, 0.8, 12);
  DatasetSpec spec;
  spec.budget = 0.05;
  spec.coverage = 0.8;
  spec.diversity = 32;
  const Dataset base = build_sft_dataset(m, split, spec);
  const std::vector<int> targets{22, 24};

  const auto same = augment_with_length(base.records, m, split, targets, 0.0, 1);
  EXPECT_EQ(same, base.records);

  const auto aug = augment_with_length(base.records, m, split, targets, 0.01, 1);
  const auto add = static_cast<std::size_t>(round_half_up(0.01 * static_cast<double>(base.records.size())));
  ASSERT_EQ(aug.size(), base.records.size() + 2 * add);
  std::set<std::vector<Direction>> seen;
  std::map<std::size_t, std::size_t> by_len;
  const PairSupport support = PairSupport::from_records(base.records);
  for (std::size_t k = base.records.size(); k < aug.size(); ++k) {
    const auto& r = aug[k];
    const int d = *shortest_distance(m, r.query.start, r.query.end);
    EXPECT_EQ(static_cast<std::size_t>(d), r.length());
    ++by_len[r.length()];
    EXPECT_FALSE(support.contains(r.query.start, r.query.end));
    EXPECT_EQ(verify_completion(m, r.query, std::string_view(
                  encode_record(m, r)).substr(encode_record(m, r).find(':') + 2)).outcome,
              OutcomeClass::kSuccess);
  }
  EXPECT_EQ(by_len[22], add);
  EXPECT_EQ(by_len[24], add);
  const std::vector<int> impossible{500};
  EXPECT_THROW(augment_with_length(base.records, m, split, impossible, 0.01, 1), CapacityError);
}

}  // namespace
}  // namespace soplab
