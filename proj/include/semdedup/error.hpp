// Copyright 2026 The semdedup Authors.
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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace semdedup {

enum class ErrorKind {
  kInvalidArgument,
  kFormat,
  kData,
  kDegenerateRow,
  kBracket,
  kConstruction,
  kIo,
};

const char* error_kind_name(ErrorKind kind);

// Base of every exception thrown by the library. `row()` is set for errors
// that can be attributed to a single input row.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::uint64_t> row = std::nullopt)
      : std::runtime_error(what), kind_(kind), row_(row) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::uint64_t> row() const noexcept { return row_; }

 private:
  ErrorKind kind_;
  std::optional<std::uint64_t> row_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::kFormat, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what,
                     std::optional<std::uint64_t> row = std::nullopt)
      : Error(ErrorKind::kData, what, row) {}
};

class DegenerateRowError : public Error {
 public:
  DegenerateRowError(const std::string& what, std::uint64_t row)
      : Error(ErrorKind::kDegenerateRow, what, row) {}
};

class BracketError : public Error {
 public:
  explicit BracketError(const std::string& what)
      : Error(ErrorKind::kBracket, what) {}
};

class ConstructionError : public Error {
 public:
  explicit ConstructionError(const std::string& what)
      : Error(ErrorKind::kConstruction, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace semdedup
