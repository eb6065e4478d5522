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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "soplab/grid_map.hpp"

namespace soplab {

inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";
inline constexpr std::string_view kSepToken = ":";
inline constexpr std::string_view kPadToken = "<pad>";

// Ordered collection of maps with disjoint node vocabularies and a bijective
// token table: special tokens, then direction tokens, then every node token
// of every map in registration order.
class MapRegistry {
 public:
  struct NodeRef {
    const GridMap* map = nullptr;
    NodeId node;
  };

  MapRegistry();

  // Throws ParameterError when the map's id or index is already taken.
  void add(GridMap map);

  const std::vector<std::unique_ptr<GridMap>>& maps() const noexcept { return maps_; }
  std::size_t size() const noexcept { return maps_.size(); }

  const GridMap* find(std::string_view map_id) const noexcept;
  const GridMap& at(std::string_view map_id) const;  // throws MembershipError

  std::optional<NodeRef> resolve_node(std::string_view token) const noexcept;

  const std::vector<std::string>& token_table() const noexcept { return tokens_; }
  std::optional<std::uint32_t> token_id(std::string_view token) const noexcept;

 private:
  std::vector<std::unique_ptr<GridMap>> maps_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> token_ids_;
  std::unordered_map<std::uint32_t, const GridMap*> by_index_;
};

nlohmann::json map_to_json(const GridMap& map);
GridMap map_from_json(const nlohmann::json& j);  // throws FormatError

void write_map_file(const GridMap& map, const std::filesystem::path& path);
GridMap read_map_file(const std::filesystem::path& path);

// Registry file: {"maps": [relative map paths...], "tokens": [...]}. Map
// paths are resolved against the registry file's directory.
void write_registry_file(const MapRegistry& registry,
                         const std::vector<std::string>& map_paths,
                         const std::filesystem::path& path);
MapRegistry read_registry_file(const std::filesystem::path& path);
std::vector<std::string> registry_map_paths(const std::filesystem::path& path);

// Whole-file helpers shared by the tools.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace soplab
