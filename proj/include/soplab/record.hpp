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

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

#include "soplab/pathfind.hpp"
#include "soplab/registry.hpp"

namespace soplab {

// A training record is a query together with one of its shortest paths.
using Record = Path;

// `<s> i j : i <directions...> j </s>`
std::string encode_record(const GridMap& map, const Record& record);

struct DecodeFailure {
  std::size_t position = 0;  // token index of the first offending token
  std::string reason;
  friend bool operator==(const DecodeFailure&, const DecodeFailure&) = default;
};

using DecodeResult = std::variant<Record, DecodeFailure>;

// Inverse of encode_record. Anything that is not the exact encoding of a
// shortest path yields a DecodeFailure; no partially valid record is ever
// returned.
DecodeResult decode_record(std::string_view line, const GridMap& map);
DecodeResult decode_record(std::string_view line, const MapRegistry& registry);

}  // namespace soplab
