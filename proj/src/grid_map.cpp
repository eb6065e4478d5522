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

#include "soplab/grid_map.hpp"

#include <algorithm>
#include <charconv>
#include <deque>

#include "soplab/error.hpp"
#include "soplab/rng.hpp"

namespace soplab {

std::string_view to_token(Direction d) noexcept {
  switch (d) {
    case Direction::kEast: return "E";
    case Direction::kWest: return "W";
    case Direction::kNorth: return "N";
    case Direction::kSouth: return "S";
  }
  return "?";
}

std::optional<Direction> direction_from_token(std::string_view token) noexcept {
  if (token.size() != 1) return std::nullopt;
  switch (token[0]) {
    case 'E': return Direction::kEast;
    case 'W': return Direction::kWest;
    case 'N': return Direction::kNorth;
    case 'S': return Direction::kSouth;
    default: return std::nullopt;
  }
}

std::string default_map_id(std::uint32_t map_index) {
  return "m" + std::to_string(map_index);
}

namespace {

std::optional<Direction> direction_between(Cell a, Cell b) {
  for (Direction d : kAllDirections) {
    if (a.x + delta_x(d) == b.x && a.y + delta_y(d) == b.y) return d;
  }
  return std::nullopt;
}

}  // namespace

GridMap GridMap::from_edges(MapInfo info,
                            const std::vector<std::pair<NodeId, NodeId>>& edges) {
  if (info.width < 1 || info.height < 1) {
    throw ParameterError("map dimensions must be positive, got " +
                         std::to_string(info.width) + "x" +
                         std::to_string(info.height));
  }
  if (!(info.sparsity >= 0.0 && info.sparsity <= 1.0)) {
    throw ParameterError("sparsity must lie in [0, 1]");
  }
  if (info.map_id.empty()) info.map_id = default_map_id(info.map_index);
  const auto n = static_cast<std::size_t>(info.width) *
                 static_cast<std::size_t>(info.height);
  GridMap map(std::move(info), std::vector<std::uint8_t>(n, 0));
  for (const auto& [a, b] : edges) {
    if (!map.contains(a) || !map.contains(b)) {
      throw FormatError("edge references a node outside the map");
    }
    const auto d = direction_between(map.cell(a), map.cell(b));
    if (!d) {
      throw FormatError("edge (" + std::to_string(a.value) + "," +
                        std::to_string(b.value) +
                        ") does not join 4-neighbour cells");
    }
    map.open_[a.value] |= direction_bit(*d);
    map.open_[b.value] |= direction_bit(inverse(*d));
  }
  return map;
}

void GridMap::require(NodeId n) const {
  if (!contains(n)) {
    throw MembershipError("node " + std::to_string(n.value) +
                          " does not belong to map " + info_.map_id);
  }
}

std::optional<NodeId> GridMap::node_at(int x, int y) const noexcept {
  if (x < 0 || y < 0 || x >= info_.width || y >= info_.height) return std::nullopt;
  return NodeId{static_cast<std::uint32_t>(y * info_.width + x)};
}

int GridMap::degree(NodeId n) const noexcept {
  return __builtin_popcount(open_[n.value]);
}

std::vector<Neighbor> GridMap::neighbors(NodeId n) const {
  require(n);
  std::vector<Neighbor> out;
  out.reserve(4);
  for (Direction d : kAllDirections) {
    if (has_edge(n, d)) out.push_back({d, apply_move(n, d).target});
  }
  return out;
}

MoveResult GridMap::apply_move(NodeId n, Direction d) const {
  require(n);
  const Cell c = cell(n);
  const auto target = node_at(c.x + delta_x(d), c.y + delta_y(d));
  if (!target) return {MoveStatus::kOffGrid, {}};
  if (!has_edge(n, d)) return {MoveStatus::kBlocked, {}};
  return {MoveStatus::kMoved, *target};
}

std::vector<std::pair<NodeId, NodeId>> GridMap::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count());
  // East and north neighbours always have the larger index, so emitting them
  // in index order yields a sorted list.
  for (std::uint32_t i = 0; i < open_.size(); ++i) {
    const NodeId n{i};
    if (has_edge(n, Direction::kEast)) out.emplace_back(n, NodeId{i + 1});
    if (has_edge(n, Direction::kNorth)) {
      out.emplace_back(n, NodeId{i + static_cast<std::uint32_t>(info_.width)});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t GridMap::edge_count() const noexcept {
  std::size_t total = 0;
  for (auto m : open_) total += static_cast<std::size_t>(__builtin_popcount(m));
  return total / 2;
}

bool GridMap::is_connected() const {
  if (open_.empty()) return true;
  std::vector<char> seen(open_.size(), 0);
  std::deque<NodeId> frontier{NodeId{0}};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (Direction d : kAllDirections) {
      if (!has_edge(u, d)) continue;
      const NodeId v = apply_move(u, d).target;
      if (!seen[v.value]) {
        seen[v.value] = 1;
        ++visited;
        frontier.push_back(v);
      }
    }
  }
  return visited == open_.size();
}

std::string GridMap::token(NodeId n) const {
  return "m" + std::to_string(info_.map_index) + "_n" + std::to_string(n.value);
}

std::optional<NodeId> GridMap::node_from_token(std::string_view token) const noexcept {
  if (token.size() < 4 || token[0] != 'm') return std::nullopt;
  const char* p = token.data() + 1;
  const char* end = token.data() + token.size();
  std::uint32_t index = 0;
  auto r = std::from_chars(p, end, index);
  if (r.ec != std::errc{} || r.ptr == p || index != info_.map_index) return std::nullopt;
  // Reject leading zeros so each node has exactly one spelling.
  if (*p == '0' && r.ptr - p > 1) return std::nullopt;
  p = r.ptr;
  if (end - p < 3 || p[0] != '_' || p[1] != 'n') return std::nullopt;
  p += 2;
  std::uint32_t cell = 0;
  r = std::from_chars(p, end, cell);
  if (r.ec != std::errc{} || r.ptr != end || cell >= open_.size()) return std::nullopt;
  if (*p == '0' && end - p > 1) return std::nullopt;
  return NodeId{cell};
}

GridMap generate_map(int width, int height, double sparsity, std::uint64_t seed,
                     std::uint32_t map_index) {
  if (width < 2 || height < 2) {
    throw ParameterError("generate_map requires width >= 2 and height >= 2");
  }
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw ParameterError("sparsity must lie in [0, 1]");
  }
  const auto n = static_cast<std::uint32_t>(width * height);
  auto grid_neighbor = [&](std::uint32_t c, Direction d) -> std::optional<std::uint32_t> {
    const int x = static_cast<int>(c % static_cast<std::uint32_t>(width)) + delta_x(d);
    const int y = static_cast<int>(c / static_cast<std::uint32_t>(width)) + delta_y(d);
    if (x < 0 || y < 0 || x >= width || y >= height) return std::nullopt;
    return static_cast<std::uint32_t>(y * width + x);
  };

  // Wilson's algorithm: loop-erased random walks into the growing tree.
  Rng tree_rng = Rng::stream(seed, StreamTag::kMapTree);
  std::vector<char> in_tree(n, 0);
  std::vector<Direction> next(n, Direction::kEast);
  std::vector<std::uint8_t> tree(n, 0);
  in_tree[tree_rng.below(std::uint64_t{n})] = 1;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t u = i;
    while (!in_tree[u]) {
      std::array<Direction, 4> options{};
      std::size_t k = 0;
      for (Direction d : kAllDirections) {
        if (grid_neighbor(u, d)) options[k++] = d;
      }
      next[u] = options[tree_rng.below(std::uint64_t{k})];
      u = *grid_neighbor(u, next[u]);
    }
    u = i;
    while (!in_tree[u]) {
      in_tree[u] = 1;
      const std::uint32_t v = *grid_neighbor(u, next[u]);
      tree[u] |= direction_bit(next[u]);
      tree[v] |= direction_bit(inverse(next[u]));
      u = v;
    }
  }

  Rng keep_rng = Rng::stream(seed, StreamTag::kMapRetain);
  const double keep = 1.0 - sparsity;
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(full_grid_edge_count(width, height));
  for (std::uint32_t c = 0; c < n; ++c) {
    for (Direction d : {Direction::kEast, Direction::kNorth}) {
      const auto v = grid_neighbor(c, d);
      if (!v) continue;
      if ((tree[c] & direction_bit(d)) != 0 || keep_rng.bernoulli(keep)) {
        edges.emplace_back(NodeId{c}, NodeId{*v});
      }
    }
  }
  return GridMap::from_edges(
      MapInfo{default_map_id(map_index), map_index, width, height, sparsity, seed},
      edges);
}

}  // namespace soplab
