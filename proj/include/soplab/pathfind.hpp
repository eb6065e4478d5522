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

#include <compare>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "soplab/grid_map.hpp"
#include "soplab/rng.hpp"

namespace soplab {

// Ordered start/end pair on one map. start != end for every query the
// library emits.
struct PathQuery {
  std::string map_id;
  NodeId start;
  NodeId end;
  friend bool operator==(const PathQuery&, const PathQuery&) = default;
};

// A direction-encoded trajectory answering a query.
struct Path {
  PathQuery query;
  std::vector<Direction> moves;

  std::size_t length() const noexcept { return moves.size(); }
  // Node sequence start..terminal; throws MembershipError on an illegal move.
  std::vector<NodeId> nodes(const GridMap& map) const;
  friend bool operator==(const Path&, const Path&) = default;
};

// Exact shortest-path count. 128 bits wide; every addition is checked and an
// overflow is reported instead of wrapping.
class PathCount {
 public:
  using value_type = unsigned __int128;

  constexpr PathCount() = default;
  constexpr explicit PathCount(value_type v) : value_(v) {}

  constexpr value_type value() const noexcept { return value_; }
  bool fits_u64() const noexcept { return (value_ >> 64) == 0; }
  std::uint64_t to_u64() const;  // throws OverflowError when !fits_u64()
  std::string to_string() const;

  // Returns false on overflow, leaving *this unchanged.
  bool checked_add(PathCount other) noexcept {
    value_type sum;
    if (__builtin_add_overflow(value_, other.value_, &sum)) return false;
    value_ = sum;
    return true;
  }

  friend constexpr auto operator<=>(PathCount, PathCount) = default;

 private:
  value_type value_ = 0;
};

inline constexpr int kUnreachable = -1;

// Breadth-first distances from source; kUnreachable where no path exists.
std::vector<int> bfs_distances(const GridMap& map, NodeId source);

std::optional<int> shortest_distance(const GridMap& map, NodeId from, NodeId to);

// Distances and shortest-path counts from one source. Counting, sampling and
// enumeration for any target reuse the same breadth-first layering.
class SourceField {
 public:
  SourceField(const GridMap& map, NodeId source);

  NodeId source() const noexcept { return source_; }
  const GridMap& map() const noexcept { return *map_; }
  int distance(NodeId target) const noexcept { return dist_[target.value]; }
  const std::vector<int>& distances() const noexcept { return dist_; }

  // Number of distinct shortest paths; 0 when unreachable. Throws
  // OverflowError when the count exceeds 128 bits.
  PathCount count(NodeId target) const;

  // Uniformly random shortest path, sampled backwards from the target with
  // predecessor weights proportional to their prefix counts.
  Path sample(NodeId target, Rng& rng) const;

  // All shortest paths in lexicographic move order. Throws CapacityError if
  // there are more than `limit`.
  std::vector<Path> enumerate(NodeId target, std::size_t limit) const;

  // min(wanted, count) distinct shortest paths. Sets of at most
  // kEnumerationLimit paths are enumerated and drawn without replacement;
  // larger sets are rejection-sampled with at most 100 * wanted attempts.
  std::vector<Path> sample_distinct(NodeId target, std::size_t wanted, Rng& rng) const;

  static constexpr std::size_t kEnumerationLimit = 4096;

 private:
  void require_target(NodeId target) const;

  const GridMap* map_;
  NodeId source_;
  std::vector<int> dist_;
  std::vector<PathCount> count_;
  std::vector<char> overflow_;
};

PathCount count_shortest_paths(const GridMap& map, NodeId from, NodeId to);
Path sample_shortest_path(const GridMap& map, NodeId from, NodeId to, Rng& rng);

struct Walk {
  std::vector<NodeId> nodes;  // steps + 1 entries
  std::vector<Direction> moves;
};

// Each step follows a uniformly chosen incident edge.
Walk random_walk(const GridMap& map, NodeId start, int steps, Rng& rng);

// Thread-safe LRU cache of breadth-first distance fields keyed by
// (map index, source). Cached and fresh fields are identical, so the cache
// never changes an observable result.
class DistanceCache {
 public:
  explicit DistanceCache(std::size_t capacity = 4096);

  std::shared_ptr<const std::vector<int>> distances(const GridMap& map, NodeId source);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const;
  std::uint64_t hits() const;
  std::uint64_t misses() const;

 private:
  using Key = std::uint64_t;
  struct Entry {
    Key key;
    std::shared_ptr<const std::vector<int>> field;
  };

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> lru_;
  std::unordered_map<Key, std::list<Entry>::iterator> index_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

}  // namespace soplab
