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

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

#include "soplab/digest.hpp"
#include "soplab/error.hpp"

namespace soplab {

NodeSplit split_nodes(const GridMap& map, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("train fraction must lie in (0, 1)");
  }
  std::vector<NodeId> nodes(map.node_count());
  for (std::uint32_t c = 0; c < nodes.size(); ++c) nodes[c] = NodeId{c};
  Rng rng = Rng::stream(seed, StreamTag::kSplit);
  rng.shuffle(std::span<NodeId>(nodes));
  const auto n_train = static_cast<std::size_t>(
      round_half_up(train_fraction * static_cast<double>(nodes.size())));
  NodeSplit split{map.map_id(), train_fraction, seed, {}, {}};
  split.train.assign(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.holdout.assign(nodes.begin() + static_cast<std::ptrdiff_t>(n_train), nodes.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.holdout.begin(), split.holdout.end());
  return split;
}

nlohmann::json split_to_json(const NodeSplit& split) {
  auto ids = [](const std::vector<NodeId>& v) {
    std::vector<std::uint32_t> out;
    out.reserve(v.size());
    for (NodeId n : v) out.push_back(n.value);
    return out;
  };
  return {{"map_id", split.map_id},
          {"train_fraction", split.train_fraction},
          {"seed", split.seed},
          {"train", ids(split.train)},
          {"holdout", ids(split.holdout)}};
}

NodeSplit split_from_json(const nlohmann::json& j, const GridMap& map) {
  try {
    NodeSplit split;
    split.map_id = j.at("map_id").get<std::string>();
    split.train_fraction = j.at("train_fraction").get<double>();
    split.seed = j.at("seed").get<std::uint64_t>();
    if (split.map_id != map.map_id()) {
      throw FormatError("split belongs to map '" + split.map_id + "', not '" + map.map_id() + "'");
    }
    std::vector<char> seen(map.node_count(), 0);
    auto load = [&](const char* key, std::vector<NodeId>& dst) {
      for (auto v : j.at(key).get<std::vector<std::uint32_t>>()) {
        if (v >= map.node_count() || seen[v]) throw FormatError("split is not a partition");
        seen[v] = 1;
        dst.push_back(NodeId{v});
      }
      std::sort(dst.begin(), dst.end());
    };
    load("train", split.train);
    load("holdout", split.holdout);
    if (split.train.size() + split.holdout.size() != map.node_count()) {
      throw FormatError("split does not cover every node");
    }
    return split;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid split JSON: ") + e.what());
  }
}

std::string_view to_string(Allocation a) noexcept {
  return a == Allocation::kQuestionsFirst ? "questions-first" : "fixed-answers";
}

std::optional<Allocation> allocation_from_string(std::string_view s) noexcept {
  if (s == "questions-first") return Allocation::kQuestionsFirst;
  if (s == "fixed-answers") return Allocation::kFixedAnswers;
  return std::nullopt;
}

nlohmann::json spec_to_json(const DatasetSpec& spec) {
  return {{"map_id", spec.map_id},         {"budget", spec.budget},
          {"records", spec.records ? nlohmann::json(*spec.records) : nlohmann::json(nullptr)},
          {"coverage", spec.coverage},     {"diversity", spec.diversity},
          {"answers", spec.answers},       {"lmin", spec.min_length},
          {"lmax", spec.max_length},       {"allocation", std::string(to_string(spec.allocation))},
          {"seed", spec.seed}};
}

DatasetMeasurement measure_dataset(std::span<const std::string> lines, const GridMap& map) {
  DatasetMeasurement m;
  std::set<std::pair<NodeId, NodeId>> questions;
  std::set<NodeId> starts;
  std::set<NodeId> covered;
  std::unordered_set<std::string_view> unique_lines;
  for (const std::string& line : lines) {
    const auto tok = split_tokens(line);
    const auto start = tok.size() > 2 ? map.node_from_token(tok[1]) : std::nullopt;
    const auto end = tok.size() > 2 ? map.node_from_token(tok[2]) : std::nullopt;
    if (!start || !end) throw FormatError("dataset line without valid endpoint tokens: " + line);
    questions.emplace(*start, *end);
    starts.insert(*start);
    covered.insert(*start);
    covered.insert(*end);
    if (!unique_lines.insert(line).second) ++m.duplicates;
  }
  m.records = lines.size();
  m.questions = questions.size();
  m.start_nodes = starts.size();
  m.covered_nodes = covered.size();
  m.coverage = static_cast<double>(covered.size()) / static_cast<double>(map.node_count());
  m.diversity = starts.empty() ? 0.0
                               : static_cast<double>(questions.size()) /
                                     static_cast<double>(starts.size());
  return m;
}

nlohmann::json manifest_to_json(const DatasetManifest& manifest) {
  const auto& m = manifest.measured;
  return {{"spec", spec_to_json(manifest.spec)},
          {"coverage_nodes", manifest.coverage_nodes},
          {"pool_size", manifest.pool_size},
          {"target_records", manifest.target_records},
          {"counts",
           {{"records", m.records},
            {"questions", m.questions},
            {"start_nodes", m.start_nodes},
            {"covered_nodes", m.covered_nodes},
            {"duplicates", m.duplicates},
            {"measured_coverage", m.coverage},
            {"measured_diversity", m.diversity}}},
          {"coverage_attained", manifest.coverage_attained},
          {"diversity_attained", manifest.diversity_attained},
          {"binding", manifest.binding},
          {"files", manifest.files},
          {"digest", manifest.digest}};
}

std::string Dataset::content() const {
  std::string out;
  for (const auto& line : lines) out.append(line).push_back('\n');
  return out;
}

namespace {

struct Question {
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  std::uint64_t capacity = 0;  // distinct shortest paths, saturated
  std::uint64_t answers = 0;
};

struct StartCandidates {
  std::uint32_t start = 0;
  std::vector<std::uint32_t> eligible;    // ascending
  std::vector<std::uint64_t> capacity;    // parallel to eligible
  std::vector<std::uint32_t> chosen;      // indices into eligible, draw order
};

void validate(const DatasetSpec& spec) {
  if (spec.records) {
    if (*spec.records == 0) throw ParameterError("record count must be positive");
  } else if (!(spec.budget > 0.0 && spec.budget <= 1.0)) {
    throw ParameterError("budget must lie in (0, 1]");
  }
  if (!(spec.coverage > 0.0 && spec.coverage <= 1.0)) throw ParameterError("coverage must lie in (0, 1]");
  if (spec.diversity < 1) throw ParameterError("diversity must be at least 1");
  if (spec.answers < 1) throw ParameterError("answers per question must be at least 1");
  if (spec.min_length < 1 || spec.min_length > spec.max_length) {
    throw ParameterError("length bounds must satisfy 1 <= lmin <= lmax");
  }
}

// Spreads `remaining` over the listed questions as evenly as their
// capacities allow, earlier questions first on ties.
void water_fill(std::vector<Question>& qs, std::size_t first, std::uint64_t& remaining) {
  while (remaining > 0) {
    std::vector<std::size_t> active;
    for (std::size_t k = first; k < qs.size(); ++k) {
      if (qs[k].answers < qs[k].capacity) active.push_back(k);
    }
    if (active.empty()) return;
    const std::uint64_t share = remaining / active.size();
    if (share == 0) {
      for (std::size_t k = 0; k < remaining; ++k) ++qs[active[k]].answers;
      remaining = 0;
      return;
    }
    for (auto k : active) {
      const std::uint64_t add = std::min(share, qs[k].capacity - qs[k].answers);
      qs[k].answers += add;
      remaining -= add;
    }
  }
}

}  // namespace

Dataset build_sft_dataset(const GridMap& map, const NodeSplit& split, const DatasetSpec& spec) {
  validate(spec);
  const std::size_t n_nodes = map.node_count();
  const auto k = static_cast<std::size_t>(round_half_up(spec.coverage * static_cast<double>(n_nodes)));
  if (k < 2) {
    throw CapacityError("coverage " + std::to_string(spec.coverage) + " selects " +
                        std::to_string(k) + " nodes; at least 2 are needed");
  }
  if (k > split.train.size()) {
    throw CapacityError("coverage needs " + std::to_string(k) + " nodes but the split has only " +
                        std::to_string(split.train.size()) + " training nodes");
  }

  std::vector<NodeId> coverage_nodes = split.train;
  Rng::stream(spec.seed, StreamTag::kCoverage).shuffle(std::span<NodeId>(coverage_nodes));
  coverage_nodes.resize(k);
  std::sort(coverage_nodes.begin(), coverage_nodes.end());
  std::vector<char> in_coverage(n_nodes, 0);
  for (NodeId n : coverage_nodes) in_coverage[n.value] = 1;

  // Candidate pool and per-start endpoint draws.
  const auto d = static_cast<std::size_t>(spec.diversity);
  std::vector<StartCandidates> starts;
  starts.reserve(k);
  std::size_t pool = 0;
  bool partners_binding = false;
  for (NodeId i : coverage_nodes) {
    const SourceField field(map, i);
    StartCandidates sc{i.value, {}, {}, {}};
    for (NodeId j : coverage_nodes) {
      const int dist = field.distance(j);
      if (j == i || dist < spec.min_length || dist > spec.max_length) continue;
      sc.eligible.push_back(j.value);
      const PathCount c = field.count(j);
      sc.capacity.push_back(c.fits_u64() ? c.to_u64() : UINT64_MAX);
    }
    pool += sc.eligible.size();
    const std::size_t m = std::min(d, sc.eligible.size());
    partners_binding |= m < d;
    std::vector<std::uint32_t> idx(sc.eligible.size());
    std::iota(idx.begin(), idx.end(), 0u);
    Rng rng = Rng::stream(spec.seed, StreamTag::kEndpoints, i.value);
    for (std::size_t t = 0; t < m; ++t) {
      std::swap(idx[t], idx[t + rng.below(static_cast<std::uint64_t>(idx.size() - t))]);
    }
    sc.chosen.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
    starts.push_back(std::move(sc));
  }
  if (pool == 0) {
    throw CapacityError("candidate pool is empty: no pair of coverage nodes has distance in [" +
                        std::to_string(spec.min_length) + ", " + std::to_string(spec.max_length) + "]");
  }
  const auto target = spec.records ? static_cast<std::uint64_t>(*spec.records)
                                   : static_cast<std::uint64_t>(round_half_up(spec.budget * static_cast<double>(pool)));
  if (target == 0) {
    throw CapacityError("budget " + std::to_string(spec.budget) + " of a pool of " +
                        std::to_string(pool) + " pairs rounds to zero records");
  }
  std::size_t support = 0;
  for (const auto& sc : starts) support += sc.chosen.size();

  const std::uint64_t per_question =
      spec.allocation == Allocation::kFixedAnswers ? static_cast<std::uint64_t>(spec.answers) : 1;
  const std::uint64_t questions_needed = (target + per_question - 1) / per_question;
  const bool budget_binding = questions_needed < support;

  // Ordered question list. Without a binding budget this is the drawn
  // support, round-robin over starts. With one, a cover pass comes first so
  // the budget reaches as many coverage nodes as possible.
  std::vector<std::size_t> start_order(k);
  std::iota(start_order.begin(), start_order.end(), std::size_t{0});
  Rng order_rng = Rng::stream(spec.seed, StreamTag::kQuestionOrder);
  order_rng.shuffle(std::span<std::size_t>(start_order));

  std::vector<Question> qs;
  std::set<std::pair<std::uint32_t, std::uint32_t>> used;
  std::vector<std::size_t> per_start(k, 0);
  auto push = [&](std::size_t s, std::size_t e) {
    const auto& sc = starts[s];
    if (!used.emplace(sc.start, sc.eligible[e]).second) return;
    qs.push_back({sc.start, sc.eligible[e], sc.capacity[e], 0});
    ++per_start[s];
  };
  if (budget_binding) {
    std::vector<char> covered(n_nodes, 0);
    for (std::size_t s : start_order) {
      const auto& sc = starts[s];
      if (covered[sc.start] || sc.eligible.empty()) continue;
      std::optional<std::size_t> pick;
      for (auto e : sc.chosen) {
        if (!covered[sc.eligible[e]]) {
          pick = e;
          break;
        }
      }
      if (!pick) {
        std::vector<std::size_t> open;
        for (std::size_t e = 0; e < sc.eligible.size(); ++e) {
          if (!covered[sc.eligible[e]]) open.push_back(e);
        }
        if (!open.empty()) {
          pick = open[order_rng.below(static_cast<std::uint64_t>(open.size()))];
        } else if (!sc.chosen.empty()) {
          pick = sc.chosen.front();
        }
      }
      if (!pick) continue;
      covered[sc.start] = 1;
      covered[sc.eligible[*pick]] = 1;
      push(s, *pick);
    }
  }
  for (std::size_t round = 0; round < d; ++round) {
    for (std::size_t s : start_order) {
      const auto& sc = starts[s];
      if (round < sc.chosen.size() && per_start[s] < d) push(s, sc.chosen[round]);
    }
  }
  const std::size_t ordered = qs.size();

  std::vector<std::string> binding;
  if (partners_binding) binding.emplace_back("partners");
  if (budget_binding) binding.emplace_back("budget");

  // Pool pairs outside the ordered list, used only once every ordered
  // question has run out of distinct solutions.
  bool extras_added = false;
  auto add_extras = [&] {
    extras_added = true;
    std::vector<Question> extra;
    for (const auto& sc : starts) {
      for (std::size_t e = 0; e < sc.eligible.size(); ++e) {
        if (!used.contains({sc.start, sc.eligible[e]})) {
          extra.push_back({sc.start, sc.eligible[e], sc.capacity[e], 0});
        }
      }
    }
    Rng::stream(spec.seed, StreamTag::kExtraQuestions).shuffle(std::span<Question>(extra));
    for (auto& q : extra) {
      used.emplace(q.start, q.end);
      qs.push_back(q);
    }
  };

  std::uint64_t remaining = target;
  if (spec.allocation == Allocation::kQuestionsFirst) {
    if (budget_binding) {
      for (std::size_t t = 0; t < remaining; ++t) qs[t].answers = 1;
      remaining = 0;
    } else {
      water_fill(qs, 0, remaining);
      if (remaining > 0) {
        add_extras();
        for (std::size_t t = ordered; t < qs.size() && remaining > 0; ++t) {
          qs[t].answers = 1;
          --remaining;
        }
        water_fill(qs, 0, remaining);
      }
    }
  } else {
    auto give = [&](std::size_t from) {
      for (std::size_t t = from; t < qs.size() && remaining > 0; ++t) {
        const std::uint64_t add = std::min({per_question, qs[t].capacity, remaining});
        qs[t].answers = add;
        remaining -= add;
      }
    };
    give(0);
    if (remaining > 0) {
      add_extras();
      give(ordered);
      water_fill(qs, 0, remaining);
    }
  }
  if (remaining > 0) {
    throw CapacityError("pool of " + std::to_string(pool) + " pairs holds too few distinct " +
                        "shortest paths for " + std::to_string(target) + " records");
  }
  if (extras_added && std::any_of(qs.begin() + static_cast<std::ptrdiff_t>(ordered), qs.end(),
                                  [](const Question& q) { return q.answers > 0; })) {
    binding.emplace_back("solutions");
  }

  // Sample answers start by start so each source field is built once.
  std::map<std::uint32_t, std::vector<const Question*>> by_start;
  for (const auto& q : qs) {
    if (q.answers > 0) by_start[q.start].push_back(&q);
  }
  Dataset ds;
  ds.records.reserve(target);
  for (auto& [s, list] : by_start) {
    std::sort(list.begin(), list.end(), [](const Question* a, const Question* b) { return a->end < b->end; });
    const SourceField field(map, NodeId{s});
    for (const Question* q : list) {
      Rng rng = Rng::stream(spec.seed, StreamTag::kAnswers, q->start, q->end);
      auto paths = field.sample_distinct(NodeId{q->end}, q->answers, rng);
      for (auto& p : paths) ds.records.push_back(std::move(p));
    }
  }
  ds.lines.reserve(ds.records.size());
  for (const auto& r : ds.records) ds.lines.push_back(encode_record(map, r));

  auto& manifest = ds.manifest;
  manifest.spec = spec;
  manifest.spec.map_id = map.map_id();
  manifest.coverage_nodes = k;
  manifest.pool_size = pool;
  manifest.target_records = target;
  manifest.measured = measure_dataset(ds.lines, map);
  manifest.coverage_attained = manifest.measured.covered_nodes >= k;
  manifest.diversity_attained =
      manifest.measured.questions == d * manifest.measured.start_nodes;
  manifest.binding = std::move(binding);
  manifest.digest = sha256_hex(ds.content());
  return ds;
}

std::string walk_line(const GridMap& map, const Walk& walk, WalkEncoding encoding) {
  std::string line = map.token(walk.nodes.front());
  for (std::size_t s = 0; s < walk.moves.size(); ++s) {
    if (encoding == WalkEncoding::kInterleaved) line.append(" ").append(to_token(walk.moves[s]));
    line.append(" ").append(map.token(walk.nodes[s + 1]));
  }
  return line;
}

PretrainSummary write_pretrain_corpus(const MapRegistry& registry, const PretrainSpec& spec,
                                      std::ostream& out) {
  if (registry.size() == 0) throw ParameterError("pretraining needs at least one map");
  if (spec.min_length < 1 || spec.min_length > spec.max_length) {
    throw ParameterError("walk lengths must satisfy 1 <= min_len <= max_len");
  }
  PretrainSummary summary;
  if (spec.planned_sft_max_length && spec.min_length <= *spec.planned_sft_max_length) {
    summary.warnings.push_back("min_len " + std::to_string(spec.min_length) +
                               " does not exceed the planned SFT lmax " +
                               std::to_string(*spec.planned_sft_max_length));
  }
  Sha256 hash;
  for (std::size_t w = 0; w < spec.walks; ++w) {
    const GridMap& map = *registry.maps()[w % registry.size()];
    Rng rng = Rng::stream(spec.seed, StreamTag::kWalk, w);
    const int steps = static_cast<int>(rng.between(spec.min_length, spec.max_length));
    const NodeId start{static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(map.node_count())))};
    const Walk walk = random_walk(map, start, steps, rng);
    std::string line = walk_line(map, walk, spec.encoding);
    summary.tokens += spec.encoding == WalkEncoding::kInterleaved ? 2 * walk.moves.size() + 1
                                                                 : walk.moves.size() + 1;
    line.push_back('\n');
    out << line;
    hash.update(line);
  }
  summary.walks = spec.walks;
  summary.digest = hash.hex_digest();
  return summary;
}

PairSupport PairSupport::from_records(std::span<const Record> records) {
  PairSupport s;
  for (const auto& r : records) s.insert(r.query.start, r.query.end);
  return s;
}

std::vector<EvalGroupSet> build_eval_sets(const GridMap& map, const NodeSplit* split,
                                          const EvalSetSpec& spec, const PairSupport* exclude) {
  if (spec.groups.empty()) throw ParameterError("no length groups given");
  std::vector<NodeId> eligible;
  if (split != nullptr) {
    if (split->map_id != map.map_id()) throw ParameterError("split does not belong to this map");
    eligible = split->holdout;
  } else {
    eligible.resize(map.node_count());
    for (std::uint32_t c = 0; c < eligible.size(); ++c) eligible[c] = NodeId{c};
  }
  std::vector<std::vector<std::pair<NodeId, NodeId>>> candidates(spec.groups.size());
  for (NodeId i : eligible) {
    const auto dist = bfs_distances(map, i);
    for (NodeId j : eligible) {
      if (i == j || dist[j.value] == kUnreachable) continue;
      const int g = find_group(spec.groups, dist[j.value]);
      if (g < 0 || (exclude != nullptr && exclude->contains(i, j))) continue;
      candidates[static_cast<std::size_t>(g)].emplace_back(i, j);
    }
  }
  std::vector<EvalGroupSet> out;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    auto& pool = candidates[g];
    EvalGroupSet set{spec.groups[g], {}, pool.size(), pool.size() < spec.per_group};
    const std::size_t n = std::min(spec.per_group, pool.size());
    Rng rng = Rng::stream(spec.seed, StreamTag::kEvalGroup, g);
    for (std::size_t t = 0; t < n; ++t) {
      std::swap(pool[t], pool[t + rng.below(static_cast<std::uint64_t>(pool.size() - t))]);
    }
    pool.resize(n);
    std::sort(pool.begin(), pool.end());
    for (const auto& [i, j] : pool) set.queries.push_back({map.map_id(), i, j});
    out.push_back(std::move(set));
  }
  return out;
}

std::string query_to_tsv(const GridMap& map, const PathQuery& query) {
  return map.map_id() + "\t" + map.token(query.start) + "\t" + map.token(query.end);
}

std::vector<Record> augment_with_length(std::span<const Record> records, const GridMap& map,
                                        const NodeSplit& split, std::span<const int> targets,
                                        double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ParameterError("fraction must lie in [0, 1]");
  std::vector<Record> out(records.begin(), records.end());
  const auto add = static_cast<std::size_t>(
      round_half_up(fraction * static_cast<double>(records.size())));
  if (add == 0 || targets.empty()) return out;

  const PairSupport support = PairSupport::from_records(records);
  std::map<int, std::vector<std::pair<NodeId, NodeId>>> by_length;
  for (int t : targets) {
    if (t < 1) throw ParameterError("target lengths must be positive");
    by_length[t];
  }
  for (NodeId i : split.train) {
    const auto dist = bfs_distances(map, i);
    for (NodeId j : split.train) {
      const auto it = by_length.find(dist[j.value]);
      if (i != j && it != by_length.end() && !support.contains(i, j)) it->second.emplace_back(i, j);
    }
  }
  std::set<int> done;
  for (int t : targets) {
    if (!done.insert(t).second) continue;
    auto& pool = by_length[t];
    if (pool.size() < add) {
      throw CapacityError("only " + std::to_string(pool.size()) + " unseen train-node pairs at length " +
                          std::to_string(t) + ", " + std::to_string(add) + " requested");
    }
    Rng rng = Rng::stream(seed, StreamTag::kAugment, static_cast<std::uint64_t>(t));
    for (std::size_t k = 0; k < add; ++k) {
      std::swap(pool[k], pool[k + rng.below(static_cast<std::uint64_t>(pool.size() - k))]);
    }
    pool.resize(add);
    std::sort(pool.begin(), pool.end());
    for (const auto& [i, j] : pool) {
      Rng path_rng = Rng::stream(seed, StreamTag::kAugment, static_cast<std::uint64_t>(t), i.value, j.value);
      out.push_back(sample_shortest_path(map, i, j, path_rng));
    }
  }
  return out;
}

}  // namespace soplab
