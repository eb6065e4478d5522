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

#include "soplab/text.hpp"

#include <algorithm>
#include <charconv>

#include "soplab/error.hpp"

namespace soplab {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

int parse_int(std::string_view s, std::string_view context) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw ParameterError("bad length group '" + std::string(context) + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string join_tokens(const std::vector<std::string_view>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out.append(tokens[i]);
  }
  return out;
}

std::string LengthGroup::label() const {
  return "(" + std::to_string(lo) + "," + std::to_string(hi) + "]";
}

std::vector<LengthGroup> parse_length_groups(std::string_view text) {
  std::vector<LengthGroup> groups;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (is_space(text[i]) || text[i] == ',')) ++i;
    if (i >= text.size()) break;
    std::string_view item;
    if (text[i] == '(') {
      const auto close = text.find(']', i);
      if (close == std::string_view::npos) throw ParameterError("unterminated length group");
      item = text.substr(i + 1, close - i - 1);
      i = close + 1;
      const auto comma = item.find(',');
      if (comma == std::string_view::npos) throw ParameterError("bad length group");
      groups.push_back({parse_int(item.substr(0, comma), item),
                        parse_int(item.substr(comma + 1), item)});
    } else {
      const auto end = std::min(text.find(',', i), text.size());
      item = text.substr(i, end - i);
      i = end;
      const auto dash = item.find('-', 1);
      if (dash == std::string_view::npos) throw ParameterError("bad length group '" + std::string(item) + "'");
      groups.push_back({parse_int(item.substr(0, dash), item), parse_int(item.substr(dash + 1), item)});
    }
  }
  if (groups.empty()) throw ParameterError("no length groups given");
  for (std::size_t a = 0; a < groups.size(); ++a) {
    if (groups[a].hi <= groups[a].lo) {
      throw ParameterError("empty length group " + groups[a].label());
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (groups[a].lo < groups[b].hi && groups[b].lo < groups[a].hi) {
        throw ParameterError("length groups " + groups[b].label() + " and " +
                             groups[a].label() + " overlap");
      }
    }
  }
  return groups;
}

int find_group(const std::vector<LengthGroup>& groups, int length) noexcept {
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].contains(length)) return static_cast<int>(g);
  }
  return -1;
}

}  // namespace soplab
