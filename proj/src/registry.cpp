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

#include "soplab/registry.hpp"

#include <fstream>
#include <sstream>

#include "soplab/error.hpp"

namespace soplab {

MapRegistry::MapRegistry() {
  for (auto t : {kBosToken, kEosToken, kSepToken, kPadToken}) tokens_.emplace_back(t);
  for (Direction d : kAllDirections) tokens_.emplace_back(to_token(d));
  for (std::uint32_t i = 0; i < tokens_.size(); ++i) token_ids_.emplace(tokens_[i], i);
}

void MapRegistry::add(GridMap map) {
  if (find(map.map_id()) != nullptr) {
    throw ParameterError("map id '" + map.map_id() + "' already registered");
  }
  if (by_index_.contains(map.map_index())) {
    throw ParameterError("map index " + std::to_string(map.map_index()) +
                         " already registered; node vocabularies must be disjoint");
  }
  auto owned = std::make_unique<GridMap>(std::move(map));
  const GridMap* ptr = owned.get();
  for (std::uint32_t c = 0; c < ptr->node_count(); ++c) {
    std::string tok = ptr->token(NodeId{c});
    token_ids_.emplace(tok, static_cast<std::uint32_t>(tokens_.size()));
    tokens_.push_back(std::move(tok));
  }
  by_index_.emplace(ptr->map_index(), ptr);
  maps_.push_back(std::move(owned));
}

const GridMap* MapRegistry::find(std::string_view map_id) const noexcept {
  for (const auto& m : maps_) {
    if (m->map_id() == map_id) return m.get();
  }
  return nullptr;
}

const GridMap& MapRegistry::at(std::string_view map_id) const {
  const GridMap* m = find(map_id);
  if (m == nullptr) throw MembershipError("unknown map_id '" + std::string(map_id) + "'");
  return *m;
}

std::optional<MapRegistry::NodeRef> MapRegistry::resolve_node(
    std::string_view token) const noexcept {
  // Tokens look like m<index>_n<cell>; route by index, then let the map
  // validate the full spelling.
  if (token.size() < 4 || token[0] != 'm') return std::nullopt;
  const auto sep = token.find("_n");
  if (sep == std::string_view::npos || sep < 2) return std::nullopt;
  std::uint32_t index = 0;
  for (std::size_t i = 1; i < sep; ++i) {
    if (token[i] < '0' || token[i] > '9') return std::nullopt;
    index = index * 10 + static_cast<std::uint32_t>(token[i] - '0');
    if (index > 100000000u) return std::nullopt;
  }
  const auto it = by_index_.find(index);
  if (it == by_index_.end()) return std::nullopt;
  const auto node = it->second->node_from_token(token);
  if (!node) return std::nullopt;
  return NodeRef{it->second, *node};
}

std::optional<std::uint32_t> MapRegistry::token_id(std::string_view token) const noexcept {
  const auto it = token_ids_.find(std::string(token));
  if (it == token_ids_.end()) return std::nullopt;
  return it->second;
}

nlohmann::json map_to_json(const GridMap& map) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::uint32_t c = 0; c < map.node_count(); ++c) {
    const Cell cell = map.cell(NodeId{c});
    nodes.push_back({{"id", c}, {"token", map.token(NodeId{c})}, {"x", cell.x}, {"y", cell.y}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : map.edges()) edges.push_back({a.value, b.value});
  return {{"map_id", map.map_id()},
          {"map_index", map.map_index()},
          {"width", map.width()},
          {"height", map.height()},
          {"sparsity", map.sparsity()},
          {"seed", map.seed()},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

GridMap map_from_json(const nlohmann::json& j) {
  try {
    MapInfo info;
    info.map_id = j.at("map_id").get<std::string>();
    info.map_index = j.value("map_index", std::uint32_t{0});
    info.width = j.at("width").get<int>();
    info.height = j.at("height").get<int>();
    info.sparsity = j.at("sparsity").get<double>();
    info.seed = j.at("seed").get<std::uint64_t>();
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : j.at("edges")) {
      const auto a = e.at(0).get<std::uint32_t>();
      const auto b = e.at(1).get<std::uint32_t>();
      if (a >= b) throw FormatError("edges must list the lower id first");
      edges.emplace_back(NodeId{a}, NodeId{b});
    }
    GridMap map = GridMap::from_edges(std::move(info), edges);
    if (map.edge_count() != edges.size()) throw FormatError("duplicate edges in map file");
    const auto& nodes = j.at("nodes");
    if (nodes.size() != map.node_count()) {
      throw FormatError("map file lists " + std::to_string(nodes.size()) +
                        " nodes, expected width*height = " +
                        std::to_string(map.node_count()));
    }
    for (std::uint32_t c = 0; c < nodes.size(); ++c) {
      const auto& n = nodes[c];
      const Cell cell = map.cell(NodeId{c});
      if (n.at("id").get<std::uint32_t>() != c || n.at("x").get<int>() != cell.x ||
          n.at("y").get<int>() != cell.y ||
          n.at("token").get<std::string>() != map.token(NodeId{c})) {
        throw FormatError("node entry " + std::to_string(c) + " is inconsistent");
      }
    }
    if (!map.is_connected()) throw FormatError("map '" + map.map_id() + "' is not connected");
    return map;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid map JSON: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void write_map_file(const GridMap& map, const std::filesystem::path& path) {
  write_text_file(path, map_to_json(map).dump() + "\n");
}

GridMap read_map_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
  return map_from_json(j);
}

void write_registry_file(const MapRegistry& registry,
                         const std::vector<std::string>& map_paths,
                         const std::filesystem::path& path) {
  if (map_paths.size() != registry.size()) {
    throw ParameterError("registry file needs one path per map");
  }
  const nlohmann::json j = {{"maps", map_paths}, {"tokens", registry.token_table()}};
  write_text_file(path, j.dump() + "\n");
}

std::vector<std::string> registry_map_paths(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text_file(path)).at("maps").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid registry '" + path.string() + "': " + e.what());
  }
}

MapRegistry read_registry_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
  MapRegistry registry;
  const auto base = path.parent_path();
  try {
    for (const auto& p : j.at("maps")) registry.add(read_map_file(base / p.get<std::string>()));
    if (j.contains("tokens") &&
        j.at("tokens").get<std::vector<std::string>>() != registry.token_table()) {
      throw FormatError("registry token table does not match its maps");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid registry '" + path.string() + "': " + e.what());
  }
  return registry;
}

}  // namespace soplab
