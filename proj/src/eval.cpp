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

#include "soplab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <tuple>

#include "soplab/error.hpp"
#include "soplab/rng.hpp"

namespace soplab {
namespace {

std::size_t index_of(OutcomeClass c) { return static_cast<std::size_t>(c); }

double ratio(std::size_t num, std::size_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<EvalEntry> read_results(std::istream& in) {
  std::vector<EvalEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      EvalEntry e;
      e.result = result_from_ndjson(line);
      const auto j = nlohmann::json::parse(line);
      if (j.contains("map_id")) e.map_id = j.at("map_id").get<std::string>();
      if (j.contains("method")) e.method = j.at("method").get<std::string>();
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("results line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("results line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<GroupStats> success_rate(std::span<const VerificationResult> results,
                                     const std::vector<LengthGroup>& groups) {
  if (groups.empty()) throw ParameterError("at least one length group is required");
  std::vector<GroupStats> out(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) out[g].group = groups[g];
  for (const auto& r : results) {
    if (!r.shortest_length) continue;
    const int g = find_group(groups, *r.shortest_length);
    if (g < 0) continue;
    ++out[g].n;
    ++out[g].by_class[index_of(r.outcome)];
  }
  for (auto& s : out) {
    if (s.n > 0) s.sr = ratio(s.by_class[index_of(OutcomeClass::kSuccess)], s.n);
  }
  return out;
}

DecompositionPlan make_decomposition_queries(const GridMap& map,
                                             std::span<const PathQuery> long_queries,
                                             int max_length, std::uint64_t seed) {
  if (max_length < 1) throw ParameterError("max_length must be positive");
  DecompositionPlan plan;
  for (std::size_t k = 0; k < long_queries.size(); ++k) {
    const PathQuery& q = long_queries[k];
    map.require(q.start);
    map.require(q.end);
    const SourceField field(map, q.start);
    const int length = field.distance(q.end);
    // Both halves must be nonempty and fit within the training length.
    if (length < 2 || length > 2 * max_length) {
      plan.skipped.push_back(k);
      continue;
    }
    Rng rng = Rng::stream(seed, StreamTag::kDecompose, k);
    const Path ref = field.sample(q.end, rng);
    const auto nodes = ref.nodes(map);
    const int half = length / 2;
    DecompositionQuery d;
    d.index = k;
    d.long_query = q;
    d.midpoint = nodes[half];
    d.sub1 = {q.map_id, q.start, d.midpoint};
    d.sub2 = {q.map_id, d.midpoint, q.end};
    d.length = length;
    d.sub1_length = half;
    d.sub2_length = length - half;
    plan.queries.push_back(std::move(d));
  }
  return plan;
}

double compose_pr_long(std::optional<double> pr_long_given_both, double pr_both,
                       double pr_long_not_both) noexcept {
  return pr_long_given_both.value_or(0.0) * pr_both + pr_long_not_both;
}

std::vector<DecompositionBlock> decomposition_stats(std::span<const OutcomeRow> table,
                                                    const std::vector<LengthGroup>& groups) {
  if (table.empty()) throw ParameterError("outcome table is empty");
  if (groups.empty()) throw ParameterError("at least one length group is required");
  struct Counts {
    std::size_t n = 0, long_ok = 0, sub_ok = 0, both = 0, long_and_both = 0;
  };
  std::vector<Counts> counts(groups.size());
  for (const auto& row : table) {
    const int g = find_group(groups, row.length);
    if (g < 0) continue;
    Counts& c = counts[g];
    const bool both = row.sub1_success && row.sub2_success;
    ++c.n;
    c.long_ok += row.long_success;
    c.sub_ok += static_cast<std::size_t>(row.sub1_success) + row.sub2_success;
    c.both += both;
    c.long_and_both += row.long_success && both;
  }
  std::vector<DecompositionBlock> out(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Counts& c = counts[g];
    DecompositionBlock& b = out[g];
    b.group = groups[g];
    b.n = c.n;
    if (c.n == 0) continue;
    b.pr_long = ratio(c.long_ok, c.n);
    b.pr_sub = ratio(c.sub_ok, 2 * c.n);
    b.pr_both = ratio(c.both, c.n);
    if (c.both > 0) b.pr_long_given_both = ratio(c.long_and_both, c.both);
    b.pr_long_not_both = ratio(c.long_ok - c.long_and_both, c.n);
    const double composed = compose_pr_long(b.pr_long_given_both, *b.pr_both, *b.pr_long_not_both);
    if (std::abs(composed - *b.pr_long) > 1e-12) {
      throw Error("internal", "decomposition identity violated for group " + b.group.label());
    }
  }
  return out;
}

std::string_view to_string(SelectionStrategy s) noexcept {
  switch (s) {
    case SelectionStrategy::kGreedyFirst: return "greedy-first";
    case SelectionStrategy::kMajority: return "majority";
    case SelectionStrategy::kShortest: return "shortest";
  }
  return "?";
}

std::optional<SelectionStrategy> strategy_from_string(std::string_view s) noexcept {
  for (auto v : {SelectionStrategy::kGreedyFirst, SelectionStrategy::kMajority,
                 SelectionStrategy::kShortest}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::size_t select_candidate(std::span<const std::string> candidates, SelectionStrategy strategy,
                             const std::vector<bool>* eligible) {
  if (candidates.empty()) throw ParameterError("no candidates to select from");
  if (eligible != nullptr && eligible->size() != candidates.size()) {
    throw ParameterError("eligibility mask does not match candidate count");
  }
  std::vector<std::size_t> pool;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (eligible == nullptr || (*eligible)[k]) pool.push_back(k);
  }
  if (pool.empty()) {
    for (std::size_t k = 0; k < candidates.size(); ++k) pool.push_back(k);
  }

  switch (strategy) {
    case SelectionStrategy::kGreedyFirst:
      return pool.front();
    case SelectionStrategy::kShortest: {
      std::size_t best = pool.front();
      std::size_t best_len = split_tokens(candidates[best]).size();
      for (std::size_t k : pool) {
        const std::size_t len = split_tokens(candidates[k]).size();
        if (len < best_len) best = k, best_len = len;
      }
      return best;
    }
    case SelectionStrategy::kMajority: {
      // Exact token-sequence equality, so whitespace differences do not count.
      std::map<std::vector<std::string_view>, std::pair<std::size_t, std::size_t>> tally;
      for (std::size_t k : pool) {
        auto [it, fresh] = tally.try_emplace(split_tokens(candidates[k]), 0, k);
        ++it->second.first;
      }
      std::size_t best = pool.front(), best_votes = 0;
      for (const auto& [seq, vote] : tally) {
        const auto [votes, first] = vote;
        if (votes > best_votes || (votes == best_votes && first < best)) {
          best = first;
          best_votes = votes;
        }
      }
      return best;
    }
  }
  return pool.front();
}

CandidateSet candidate_set_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    CandidateSet set;
    const auto& q = j.at("query");
    set.map_id = q.at("map_id").get<std::string>();
    set.start = q.at("start").get<std::string>();
    set.end = q.at("end").get<std::string>();
    set.candidates = j.at("candidates").get<std::vector<std::string>>();
    if (set.candidates.empty()) throw FormatError("candidate list is empty");
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad candidate line: ") + e.what());
  }
}

std::string candidate_set_to_json(const CandidateSet& set) {
  nlohmann::ordered_json j;
  j["query"] = {{"map_id", set.map_id}, {"start", set.start}, {"end", set.end}};
  j["candidates"] = set.candidates;
  return j.dump();
}

std::vector<CandidateSet> read_candidate_sets(std::istream& in) {
  std::vector<CandidateSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(candidate_set_from_json(line));
    } catch (const FormatError& e) {
      throw FormatError("candidates line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ErrorRow> error_distribution(std::span<const EvalEntry> entries,
                                         const std::vector<LengthGroup>& groups,
                                         bool fold_malformed) {
  if (groups.empty()) throw ParameterError("at least one length group is required");
  std::vector<std::string> methods;
  for (const auto& e : entries) {
    if (std::find(methods.begin(), methods.end(), e.method) == methods.end()) {
      methods.push_back(e.method);
    }
  }
  std::vector<ErrorRow> rows;
  for (const auto& m : methods) {
    for (const auto& g : groups) rows.push_back({m, g});
  }
  for (const auto& e : entries) {
    const auto& r = e.result;
    if (!r.shortest_length || r.outcome == OutcomeClass::kSuccess) continue;
    const int g = find_group(groups, *r.shortest_length);
    if (g < 0) continue;
    const auto m = std::find(methods.begin(), methods.end(), e.method) - methods.begin();
    ErrorRow& row = rows[static_cast<std::size_t>(m) * groups.size() + g];
    ++row.errors;
    switch (r.outcome) {
      case OutcomeClass::kNonShortest: ++row.non_shortest; break;
      case OutcomeClass::kNotReached: ++row.not_reached; break;
      case OutcomeClass::kInvalidMove: ++row.invalid_move; break;
      case OutcomeClass::kMalformed: ++(fold_malformed ? row.invalid_move : row.malformed); break;
      case OutcomeClass::kSuccess: break;
    }
  }
  return rows;
}

EvalReport build_report(std::span<const EvalEntry> entries, const std::vector<LengthGroup>& groups) {
  if (groups.empty()) throw ParameterError("at least one length group is required");
  EvalReport report;
  report.groups = groups;
  std::map<std::pair<std::string, std::string>, std::vector<VerificationResult>> buckets;
  for (const auto& e : entries) {
    const int g = e.result.shortest_length ? find_group(groups, *e.result.shortest_length) : -1;
    if (g < 0) {
      ++report.ungrouped;
      continue;
    }
    buckets[{e.map_id, e.method}].push_back(e.result);
  }
  for (const auto& [key, results] : buckets) {
    for (auto& stats : success_rate(results, groups)) {
      report.rows.push_back({key.first, key.second, std::move(stats)});
    }
  }
  return report;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json groups = ordered_json::array();
  for (const auto& g : report.groups) groups.push_back(g.label());
  j["groups"] = groups;
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json classes;
    for (auto c : kAllOutcomeClasses) classes[std::string(to_string(c))] = r.stats.by_class[index_of(c)];
    rows.push_back({{"map_id", r.map_id},
                    {"method", r.method},
                    {"group", r.stats.group.label()},
                    {"n", r.stats.n},
                    {"sr", optional_number(r.stats.sr)},
                    {"classes", classes}});
  }
  j["rows"] = rows;
  j["ungrouped"] = report.ungrouped;
  if (!report.decomposition.empty()) {
    ordered_json blocks = ordered_json::array();
    for (const auto& b : report.decomposition) {
      blocks.push_back({{"group", b.group.label()},
                        {"n", b.n},
                        {"pr_long", optional_number(b.pr_long)},
                        {"pr_sub", optional_number(b.pr_sub)},
                        {"pr_sub1_and_sub2", optional_number(b.pr_both)},
                        {"pr_long_given_sub1_and_sub2", optional_number(b.pr_long_given_both)},
                        {"pr_long_and_not_sub1_and_sub2", optional_number(b.pr_long_not_both)}});
    }
    j["decomposition"] = blocks;
  }
  return j;
}

std::string success_rate_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "map_id,method,group,lo,hi,n,sr\n";
  for (const auto& r : report.rows) {
    out << csv_quote(r.map_id) << ',' << csv_quote(r.method) << ','
        << csv_quote(r.stats.group.label()) << ',' << r.stats.group.lo << ',' << r.stats.group.hi
        << ',' << r.stats.n << ',' << (r.stats.sr ? fixed(*r.stats.sr, 6) : "") << '\n';
  }
  return out.str();
}

std::string error_table_csv(const std::vector<ErrorRow>& rows, bool fold_malformed) {
  std::ostringstream out;
  out << "Length Group,Method,Non-Shortest,Not Reach,Invalid Move";
  if (!fold_malformed) out << ",Malformed";
  out << '\n';
  auto pct = [](const ErrorRow& r, std::size_t count) {
    return r.errors == 0 ? std::string() : fixed(r.percent(count), 1) + "%";
  };
  for (const auto& r : rows) {
    out << csv_quote(r.group.label()) << ',' << csv_quote(r.method) << ','
        << pct(r, r.non_shortest) << ',' << pct(r, r.not_reached) << ','
        << pct(r, r.invalid_move);
    if (!fold_malformed) out << ',' << pct(r, r.malformed);
    out << '\n';
  }
  return out.str();
}

std::string decomposition_csv(const std::vector<DecompositionBlock>& blocks) {
  std::ostringstream out;
  out << "Metrics";
  for (const auto& b : blocks) out << ',' << csv_quote(b.group.label());
  out << '\n';
  using Field = std::optional<double> DecompositionBlock::*;
  const std::pair<const char*, Field> metrics[] = {
      {"Pr(Long)", &DecompositionBlock::pr_long},
      {"Pr(Sub)", &DecompositionBlock::pr_sub},
      {"Pr(Sub1 & Sub2)", &DecompositionBlock::pr_both},
      {"Pr(Long | Sub1 & Sub2)", &DecompositionBlock::pr_long_given_both},
      {"Pr(Long & not(Sub1 & Sub2))", &DecompositionBlock::pr_long_not_both},
  };
  for (const auto& [name, field] : metrics) {
    out << name;
    for (const auto& b : blocks) {
      const auto& v = b.*field;
      out << ',' << (v ? fixed(*v, 3) : "");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace soplab
