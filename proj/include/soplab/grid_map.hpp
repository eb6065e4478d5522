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
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace soplab {

// Movement directions. Origin is the bottom-left cell: E = +x, N = +y.
enum class Direction : std::uint8_t { kEast = 0, kWest = 1, kNorth = 2, kSouth = 3 };

inline constexpr std::array<Direction, 4> kAllDirections = {
    Direction::kEast, Direction::kWest, Direction::kNorth, Direction::kSouth};

constexpr Direction inverse(Direction d) noexcept {
  switch (d) {
    case Direction::kEast: return Direction::kWest;
    case Direction::kWest: return Direction::kEast;
    case Direction::kNorth: return Direction::kSouth;
    case Direction::kSouth: return Direction::kNorth;
  }
  return d;
}

constexpr int delta_x(Direction d) noexcept {
  return d == Direction::kEast ? 1 : d == Direction::kWest ? -1 : 0;
}
constexpr int delta_y(Direction d) noexcept {
  return d == Direction::kNorth ? 1 : d == Direction::kSouth ? -1 : 0;
}
constexpr std::uint8_t direction_bit(Direction d) noexcept {
  return static_cast<std::uint8_t>(1u << static_cast<unsigned>(d));
}

std::string_view to_token(Direction d) noexcept;
std::optional<Direction> direction_from_token(std::string_view token) noexcept;

// A cell of one map, addressed by its row-major index y * width + x. The
// globally unique identity of a node is its token (see GridMap::token), which
// the registry maps to a dense vocabulary id.
struct NodeId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

struct Cell {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(Cell, Cell) = default;
};

enum class MoveStatus { kMoved, kOffGrid, kBlocked };

struct MoveResult {
  MoveStatus status = MoveStatus::kOffGrid;
  NodeId target{};  // meaningful only when status == kMoved

  explicit operator bool() const noexcept { return status == MoveStatus::kMoved; }
};

struct Neighbor {
  Direction direction;
  NodeId node;
  friend constexpr bool operator==(Neighbor, Neighbor) = default;
};

struct MapInfo {
  std::string map_id;
  std::uint32_t map_index = 0;
  int width = 0;
  int height = 0;
  double sparsity = 0.0;
  std::uint64_t seed = 0;
};

// Sparse 4-connected grid. Immutable after construction; edges are stored
// as a per-cell bitmask of open directions and are always symmetric.
class GridMap {
 public:
  // Builds a map from an explicit undirected edge list. Validates that every
  // edge joins 4-neighbour cells. Connectivity is not required here; see
  // is_connected().
  static GridMap from_edges(MapInfo info,
                            const std::vector<std::pair<NodeId, NodeId>>& edges);

  const std::string& map_id() const noexcept { return info_.map_id; }
  std::uint32_t map_index() const noexcept { return info_.map_index; }
  int width() const noexcept { return info_.width; }
  int height() const noexcept { return info_.height; }
  double sparsity() const noexcept { return info_.sparsity; }
  std::uint64_t seed() const noexcept { return info_.seed; }
  const MapInfo& info() const noexcept { return info_; }

  std::size_t node_count() const noexcept { return open_.size(); }
  bool contains(NodeId n) const noexcept { return n.value < open_.size(); }
  void require(NodeId n) const;  // throws MembershipError

  Cell cell(NodeId n) const noexcept {
    return {static_cast<int>(n.value % static_cast<std::uint32_t>(info_.width)),
            static_cast<int>(n.value / static_cast<std::uint32_t>(info_.width))};
  }
  std::optional<NodeId> node_at(int x, int y) const noexcept;

  std::uint8_t open_mask(NodeId n) const noexcept { return open_[n.value]; }
  bool has_edge(NodeId n, Direction d) const noexcept {
    return (open_[n.value] & direction_bit(d)) != 0;
  }
  int degree(NodeId n) const noexcept;

  // Edges incident to n, in E, W, N, S order.
  std::vector<Neighbor> neighbors(NodeId n) const;

  MoveResult apply_move(NodeId n, Direction d) const;

  // Edges listed once with the lower id first, sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const;
  std::size_t edge_count() const noexcept;
  bool is_connected() const;

  // Node token "m<map_index>_n<cell_index>".
  std::string token(NodeId n) const;
  std::optional<NodeId> node_from_token(std::string_view token) const noexcept;

 private:
  GridMap(MapInfo info, std::vector<std::uint8_t> open)
      : info_(std::move(info)), open_(std::move(open)) {}

  MapInfo info_;
  std::vector<std::uint8_t> open_;
};

// Uniform random spanning tree over the full grid (Wilson's algorithm) plus
// each remaining grid edge kept with probability 1 - sparsity. The result is
// always connected and depends only on the arguments.
GridMap generate_map(int width, int height, double sparsity, std::uint64_t seed,
                     std::uint32_t map_index = 0);

// Number of edges of the full width x height grid.
constexpr std::size_t full_grid_edge_count(int width, int height) noexcept {
  return static_cast<std::size_t>((width - 1) * height + width * (height - 1));
}

std::string default_map_id(std::uint32_t map_index);

}  // namespace soplab
