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

#include <stdexcept>
#include <string>

namespace soplab {

// Base of every error raised by the library. kind() is a stable
// machine-readable tag used by the CLI's stderr reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

class MembershipError : public Error {
 public:
  explicit MembershipError(const std::string& what)
      : Error("membership", what) {}
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what) : Error("capacity", what) {}
};

class OverflowError : public Error {
 public:
  explicit OverflowError(const std::string& what) : Error("overflow", what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

}  // namespace soplab
