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

#include "soplab/record.hpp"

#include "soplab/text.hpp"

namespace soplab {

std::string encode_record(const GridMap& map, const Record& record) {
  const std::string start = map.token(record.query.start);
  const std::string end = map.token(record.query.end);
  std::string line;
  line.reserve(32 + 2 * record.moves.size() + 3 * start.size());
  line.append(kBosToken).append(" ").append(start).append(" ").append(end);
  line.append(" ").append(kSepToken).append(" ").append(start);
  for (Direction d : record.moves) line.append(" ").append(to_token(d));
  line.append(" ").append(end).append(" ").append(kEosToken);
  return line;
}

namespace {

DecodeResult decode_on(const std::vector<std::string_view>& tok, const GridMap& map) {
  auto fail = [](std::size_t pos, std::string reason) -> DecodeResult {
    return DecodeFailure{pos, std::move(reason)};
  };
  if (tok.size() < 8) {
    return fail(tok.size(), "expected at least 8 tokens, found " + std::to_string(tok.size()));
  }
  const auto start = map.node_from_token(tok[1]);
  const auto end = map.node_from_token(tok[2]);
  if (!start) return fail(1, "unknown start node token");
  if (!end) return fail(2, "end node token not on the start node's map");
  if (*start == *end) return fail(2, "start and end nodes coincide");
  if (tok[3] != kSepToken) return fail(3, "expected ':'");
  if (tok[4] != tok[1]) return fail(4, "answer must begin with the start node");
  const std::size_t last = tok.size() - 1;
  if (tok[last] != kEosToken) return fail(last, "expected '</s>'");
  if (tok[last - 1] != tok[2]) return fail(last - 1, "answer must end with the end node");

  Record record{{map.map_id(), *start, *end}, {}};
  record.moves.reserve(last - 6);
  NodeId at = *start;
  for (std::size_t k = 5; k + 1 < last; ++k) {
    const auto d = direction_from_token(tok[k]);
    if (!d) return fail(k, "expected a direction token");
    const MoveResult r = map.apply_move(at, *d);
    if (!r) {
      return fail(k, r.status == MoveStatus::kOffGrid ? "move leaves the grid"
                                                      : "move crosses a blocked edge");
    }
    record.moves.push_back(*d);
    at = r.target;
  }
  if (at != *end) return fail(last - 1, "moves do not arrive at the end node");
  const auto dist = bfs_distances(map, *start)[end->value];
  if (static_cast<int>(record.moves.size()) != dist) {
    return fail(last - 1, "path of length " + std::to_string(record.moves.size()) +
                              " is not shortest (" + std::to_string(dist) + ")");
  }
  return record;
}

}  // namespace

DecodeResult decode_record(std::string_view line, const GridMap& map) {
  const auto tok = split_tokens(line);
  if (tok.empty() || tok[0] != kBosToken) return DecodeFailure{0, "expected '<s>'"};
  return decode_on(tok, map);
}

DecodeResult decode_record(std::string_view line, const MapRegistry& registry) {
  const auto tok = split_tokens(line);
  if (tok.empty() || tok[0] != kBosToken) return DecodeFailure{0, "expected '<s>'"};
  if (tok.size() < 2) return DecodeFailure{1, "missing start node token"};
  const auto ref = registry.resolve_node(tok[1]);
  if (!ref) return DecodeFailure{1, "unknown start node token"};
  return decode_on(tok, *ref->map);
}

}  // namespace soplab
