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

#include <string>
#include <string_view>
#include <vector>

namespace soplab {

// Splits on runs of ASCII whitespace.
std::vector<std::string_view> split_tokens(std::string_view line);

std::string join_tokens(const std::vector<std::string_view>& tokens);

// Half-open length interval (lo, hi].
struct LengthGroup {
  int lo = 0;
  int hi = 0;

  bool contains(int length) const noexcept { return length > lo && length <= hi; }
  std::string label() const;  // "(lo,hi]"
  friend bool operator==(const LengthGroup&, const LengthGroup&) = default;
};

// Accepts "0-10,10-20" or "(0,10],(10,20]". Groups must be nonempty and
// pairwise disjoint; throws ParameterError otherwise.
std::vector<LengthGroup> parse_length_groups(std::string_view text);

// Index of the group containing length, or -1.
int find_group(const std::vector<LengthGroup>& groups, int length) noexcept;

}  // namespace soplab
