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

#include "soplab/verifier.hpp"

#include <istream>

#include "json.hpp"
#include "soplab/error.hpp"

namespace soplab {

std::string_view to_string(OutcomeClass c) noexcept {
  switch (c) {
    case OutcomeClass::kSuccess: return "Success";
    case OutcomeClass::kNonShortest: return "NonShortest";
    case OutcomeClass::kNotReached: return "NotReached";
    case OutcomeClass::kInvalidMove: return "InvalidMove";
    case OutcomeClass::kMalformed: return "Malformed";
  }
  return "Malformed";
}

std::optional<OutcomeClass> outcome_from_string(std::string_view s) noexcept {
  for (OutcomeClass c : kAllOutcomeClasses) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

namespace {

VerificationResult classified(OutcomeClass c, std::optional<int> gen, std::optional<int> best,
                              bool trailing) {
  return {c, c == OutcomeClass::kSuccess ? 1 : 0, gen, best, trailing};
}

}  // namespace

VerificationResult verify_completion(const GridMap& map, const PathQuery& query,
                                     std::span<const std::string_view> completion,
                                     DistanceCache* cache) {
  map.require(query.start);
  map.require(query.end);
  int best_raw;
  if (cache != nullptr) {
    best_raw = (*cache->distances(map, query.start))[query.end.value];
  } else {
    best_raw = bfs_distances(map, query.start)[query.end.value];
  }
  const std::optional<int> best =
      best_raw == kUnreachable ? std::nullopt : std::optional<int>(best_raw);

  // Everything from the first terminator on is ignored.
  std::size_t body = completion.size();
  for (std::size_t k = 0; k < completion.size(); ++k) {
    if (completion[k] == kEosToken) {
      body = k;
      break;
    }
  }
  const bool trailing = body + 1 < completion.size();
  const auto tokens = completion.first(body);

  // (1) structure
  if (tokens.size() < 2 || map.node_from_token(tokens.front()) != query.start ||
      map.node_from_token(tokens.back()) != query.end) {
    return classified(OutcomeClass::kMalformed, std::nullopt, best, trailing);
  }
  std::vector<Direction> moves;
  moves.reserve(tokens.size() - 2);
  for (std::size_t k = 1; k + 1 < tokens.size(); ++k) {
    const auto d = direction_from_token(tokens[k]);
    if (!d) return classified(OutcomeClass::kMalformed, std::nullopt, best, trailing);
    moves.push_back(*d);
  }
  const int generated = static_cast<int>(moves.size());

  // (2) legality
  NodeId at = query.start;
  for (Direction d : moves) {
    const MoveResult r = map.apply_move(at, d);
    if (!r) return classified(OutcomeClass::kInvalidMove, generated, best, trailing);
    at = r.target;
  }
  // (3) arrival
  if (at != query.end) return classified(OutcomeClass::kNotReached, generated, best, trailing);
  // (4) optimality
  if (!best || generated != *best) {
    return classified(OutcomeClass::kNonShortest, generated, best, trailing);
  }
  return classified(OutcomeClass::kSuccess, generated, best, trailing);
}

VerificationResult verify_completion(const GridMap& map, const PathQuery& query,
                                     std::string_view completion, DistanceCache* cache) {
  const auto tokens = split_tokens(completion);
  return verify_completion(map, query, std::span<const std::string_view>(tokens), cache);
}

VerificationResult verify_tokens(const MapRegistry& registry, std::string_view map_id,
                                 std::string_view start_token, std::string_view end_token,
                                 std::string_view completion, DistanceCache* cache) {
  const GridMap* map = registry.find(map_id);
  if (map == nullptr) return {};
  const auto start = map->node_from_token(start_token);
  const auto end = map->node_from_token(end_token);
  if (!start || !end || *start == *end) return {};
  return verify_completion(*map, PathQuery{map->map_id(), *start, *end}, completion, cache);
}

BatchOutput batch_verify(const MapRegistry& registry, std::istream& input,
                         DistanceCache* cache, const std::vector<LengthGroup>& groups) {
  BatchOutput out;
  std::string line;
  while (std::getline(input, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view rest = line;
    std::array<std::string_view, 3> fields{};
    bool ok = true;
    for (auto& f : fields) {
      const auto tab = rest.find('\t');
      if (tab == std::string_view::npos) {
        ok = false;
        break;
      }
      f = rest.substr(0, tab);
      rest.remove_prefix(tab + 1);
    }
    VerificationResult r;
    if (ok) r = verify_tokens(registry, fields[0], fields[1], fields[2], rest, cache);
    out.results.push_back(r);

    auto& summary = out.summary;
    ++summary.total;
    ++summary.by_class[static_cast<std::size_t>(r.outcome)];
    int key = r.shortest_length.value_or(-1);
    if (!groups.empty()) key = r.shortest_length ? find_group(groups, *r.shortest_length) : -1;
    ++summary.by_group[key][static_cast<std::size_t>(r.outcome)];
  }
  return out;
}

std::string result_to_ndjson(std::size_t idx, const VerificationResult& r) {
  nlohmann::ordered_json j;
  j["idx"] = idx;
  j["class"] = to_string(r.outcome);
  j["reward"] = r.reward;
  j["gen_len"] = r.generated_length ? nlohmann::ordered_json(*r.generated_length) : nullptr;
  j["shortest_len"] = r.shortest_length ? nlohmann::ordered_json(*r.shortest_length) : nullptr;
  return j.dump();
}

VerificationResult result_from_ndjson(std::string_view line, std::size_t* idx) {
  try {
    const auto j = nlohmann::json::parse(line);
    VerificationResult r;
    const auto cls = outcome_from_string(j.at("class").get<std::string>());
    if (!cls) throw FormatError("unknown class '" + j.at("class").get<std::string>() + "'");
    r.outcome = *cls;
    r.reward = j.at("reward").get<int>();
    if (r.reward != (r.outcome == OutcomeClass::kSuccess ? 1 : 0)) {
      throw FormatError("reward inconsistent with class");
    }
    if (!j.at("gen_len").is_null()) r.generated_length = j.at("gen_len").get<int>();
    if (!j.at("shortest_len").is_null()) r.shortest_length = j.at("shortest_len").get<int>();
    if (idx != nullptr) *idx = j.at("idx").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad result line: ") + e.what());
  }
}

}  // namespace soplab
