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

#include "soplab/pathfind.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "soplab/error.hpp"

namespace soplab {

std::vector<NodeId> Path::nodes(const GridMap& map) const {
  map.require(query.start);
  std::vector<NodeId> out{query.start};
  out.reserve(moves.size() + 1);
  for (Direction d : moves) {
    const MoveResult r = map.apply_move(out.back(), d);
    if (!r) throw MembershipError("path contains an illegal move");
    out.push_back(r.target);
  }
  return out;
}

std::uint64_t PathCount::to_u64() const {
  if (!fits_u64()) throw OverflowError("path count " + to_string() + " exceeds 64 bits");
  return static_cast<std::uint64_t>(value_);
}

std::string PathCount::to_string() const {
  if (value_ == 0) return "0";
  std::string s;
  for (value_type v = value_; v != 0; v /= 10) s.push_back(static_cast<char>('0' + v % 10));
  std::reverse(s.begin(), s.end());
  return s;
}

std::vector<int> bfs_distances(const GridMap& map, NodeId source) {
  map.require(source);
  std::vector<int> dist(map.node_count(), kUnreachable);
  std::vector<NodeId> queue;
  queue.reserve(map.node_count());
  dist[source.value] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    for (Direction d : kAllDirections) {
      if (!map.has_edge(u, d)) continue;
      const NodeId v = map.apply_move(u, d).target;
      if (dist[v.value] == kUnreachable) {
        dist[v.value] = dist[u.value] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::optional<int> shortest_distance(const GridMap& map, NodeId from, NodeId to) {
  map.require(to);
  const int d = bfs_distances(map, from)[to.value];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

SourceField::SourceField(const GridMap& map, NodeId source)
    : map_(&map),
      source_(source),
      dist_(map.node_count(), kUnreachable),
      count_(map.node_count()),
      overflow_(map.node_count(), 0) {
  map.require(source);
  std::vector<NodeId> queue;
  queue.reserve(map.node_count());
  dist_[source.value] = 0;
  count_[source.value] = PathCount(1);
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    for (Direction d : kAllDirections) {
      if (!map.has_edge(u, d)) continue;
      const NodeId v = map.apply_move(u, d).target;
      if (dist_[v.value] == kUnreachable) {
        dist_[v.value] = dist_[u.value] + 1;
        queue.push_back(v);
      }
      // u is final when dequeued, so its count is complete here.
      if (dist_[v.value] == dist_[u.value] + 1) {
        if (overflow_[u.value] || !count_[v.value].checked_add(count_[u.value])) {
          overflow_[v.value] = 1;
        }
      }
    }
  }
}

void SourceField::require_target(NodeId target) const {
  map_->require(target);
  if (overflow_[target.value]) {
    throw OverflowError("shortest-path count from " + map_->token(source_) + " to " +
                        map_->token(target) + " exceeds 128 bits");
  }
}

PathCount SourceField::count(NodeId target) const {
  require_target(target);
  return count_[target.value];
}

Path SourceField::sample(NodeId target, Rng& rng) const {
  require_target(target);
  if (dist_[target.value] == kUnreachable) {
    throw ParameterError(map_->token(target) + " is unreachable from " + map_->token(source_));
  }
  Path path{{map_->map_id(), source_, target}, {}};
  path.moves.reserve(static_cast<std::size_t>(dist_[target.value]));
  NodeId v = target;
  while (v != source_) {
    auto r = rng.below(count_[v.value].value());
    bool stepped = false;
    for (Direction d : kAllDirections) {
      if (!map_->has_edge(v, d)) continue;
      const NodeId u = map_->apply_move(v, d).target;
      if (dist_[u.value] != dist_[v.value] - 1) continue;
      const auto w = count_[u.value].value();
      if (r < w) {
        path.moves.push_back(inverse(d));
        v = u;
        stepped = true;
        break;
      }
      r -= w;
    }
    if (!stepped) throw OverflowError("inconsistent path counts");  // unreachable
  }
  std::reverse(path.moves.begin(), path.moves.end());
  return path;
}

std::vector<Path> SourceField::enumerate(NodeId target, std::size_t limit) const {
  const PathCount total = count(target);
  if (total > PathCount(limit)) {
    throw CapacityError("refusing to enumerate " + total.to_string() +
                        " shortest paths (limit " + std::to_string(limit) + ")");
  }
  if (dist_[target.value] == kUnreachable) return {};

  // Mark nodes lying on some shortest path to target.
  std::vector<char> on_dag(map_->node_count(), 0);
  std::vector<NodeId> stack{target};
  on_dag[target.value] = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (Direction d : kAllDirections) {
      if (!map_->has_edge(v, d)) continue;
      const NodeId u = map_->apply_move(v, d).target;
      if (dist_[u.value] == dist_[v.value] - 1 && !on_dag[u.value]) {
        on_dag[u.value] = 1;
        stack.push_back(u);
      }
    }
  }

  std::vector<Path> out;
  out.reserve(static_cast<std::size_t>(total.value()));
  std::vector<Direction> moves;
  auto recurse = [&](auto&& self, NodeId u) -> void {
    if (u == target) {
      out.push_back(Path{{map_->map_id(), source_, target}, moves});
      return;
    }
    for (Direction d : kAllDirections) {
      if (!map_->has_edge(u, d)) continue;
      const NodeId v = map_->apply_move(u, d).target;
      if (!on_dag[v.value] || dist_[v.value] != dist_[u.value] + 1) continue;
      moves.push_back(d);
      self(self, v);
      moves.pop_back();
    }
  };
  recurse(recurse, source_);
  return out;
}

std::vector<Path> SourceField::sample_distinct(NodeId target, std::size_t wanted,
                                               Rng& rng) const {
  const PathCount total = count(target);
  if (wanted == 0 || total == PathCount(0)) return {};
  if (total <= PathCount(kEnumerationLimit)) {
    std::vector<Path> all = enumerate(target, kEnumerationLimit);
    if (wanted >= all.size()) return all;
    for (std::size_t i = 0; i < wanted; ++i) {
      const auto j = i + rng.below(static_cast<std::uint64_t>(all.size() - i));
      std::swap(all[i], all[j]);
    }
    all.resize(wanted);
    return all;
  }
  std::vector<Path> out;
  std::set<std::vector<Direction>> seen;
  const std::size_t max_attempts = 100 * wanted;
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < wanted; ++attempt) {
    Path p = sample(target, rng);
    if (seen.insert(p.moves).second) out.push_back(std::move(p));
  }
  if (out.size() < wanted) {
    throw CapacityError("drew only " + std::to_string(out.size()) + " of " +
                        std::to_string(wanted) + " distinct shortest paths in " +
                        std::to_string(max_attempts) + " attempts");
  }
  return out;
}

PathCount count_shortest_paths(const GridMap& map, NodeId from, NodeId to) {
  map.require(to);
  if (from == to) throw ParameterError("start and end must differ");
  return SourceField(map, from).count(to);
}

Path sample_shortest_path(const GridMap& map, NodeId from, NodeId to, Rng& rng) {
  map.require(to);
  if (from == to) throw ParameterError("start and end must differ");
  return SourceField(map, from).sample(to, rng);
}

Walk random_walk(const GridMap& map, NodeId start, int steps, Rng& rng) {
  map.require(start);
  if (steps < 1) throw ParameterError("random walk needs at least one step");
  if (map.degree(start) == 0) throw ParameterError("walk start has no incident edges");
  Walk walk;
  walk.nodes.reserve(static_cast<std::size_t>(steps) + 1);
  walk.moves.reserve(static_cast<std::size_t>(steps));
  walk.nodes.push_back(start);
  for (int s = 0; s < steps; ++s) {
    const NodeId u = walk.nodes.back();
    std::array<Direction, 4> options{};
    std::uint64_t k = 0;
    for (Direction d : kAllDirections) {
      if (map.has_edge(u, d)) options[k++] = d;
    }
    const Direction d = options[rng.below(k)];
    walk.moves.push_back(d);
    walk.nodes.push_back(map.apply_move(u, d).target);
  }
  return walk;
}

DistanceCache::DistanceCache(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ParameterError("cache capacity must be positive");
}

std::shared_ptr<const std::vector<int>> DistanceCache::distances(const GridMap& map,
                                                                NodeId source) {
  map.require(source);
  const Key key = (static_cast<Key>(map.map_index()) << 32) | source.value;
  {
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(key); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      ++hits_;
      return it->second->field;
    }
    ++misses_;
  }
  // Computed outside the lock; a racing duplicate computes the same field.
  auto field = std::make_shared<const std::vector<int>>(bfs_distances(map, source));
  std::lock_guard lock(mutex_);
  if (auto it = index_.find(key); it != index_.end()) return it->second->field;
  lru_.push_front(Entry{key, field});
  index_.emplace(key, lru_.begin());
  if (lru_.size() > capacity_) {
    index_.erase(lru_.back().key);
    lru_.pop_back();
  }
  return field;
}

std::size_t DistanceCache::size() const {
  std::lock_guard lock(mutex_);
  return lru_.size();
}

std::uint64_t DistanceCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::uint64_t DistanceCache::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

}  // namespace soplab
