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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "semdedup/error.hpp"

namespace semdedup::detail {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts need "
              "byte swapping");

class ByteWriter {
 public:
  void magic(const char (&tag)[5]) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::byte>(tag[i]));
  }

  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }

  template <typename T>
  void put_array(std::span<const T> values) {
    const auto* p = reinterpret_cast<const std::byte*>(values.data());
    buf_.insert(buf_.end(), p, p + values.size_bytes());
  }

  std::vector<std::byte> take() && { return std::move(buf_); }

 private:
  std::vector<std::byte> buf_;
};

// Bounds-checked cursor; every short read is a FormatError.
class ByteReader {
 public:
  ByteReader(std::span<const std::byte> bytes, const char* what)
      : bytes_(bytes), what_(what) {}

  void expect_magic(const char (&tag)[5]) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, tag, 4) != 0) {
      throw FormatError(std::string(what_) + ": bad magic bytes");
    }
    pos_ += 4;
  }

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  template <typename T>
  std::vector<T> get_array(std::uint64_t count) {
    if (count > remaining() / sizeof(T)) {
      throw FormatError(std::string(what_) + ": truncated payload");
    }
    std::vector<T> out(static_cast<std::size_t>(count));
    std::memcpy(out.data(), bytes_.data() + pos_, count * sizeof(T));
    pos_ += count * sizeof(T);
    return out;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void expect_end() const {
    if (remaining() != 0) {
      throw FormatError(std::string(what_) + ": trailing bytes after payload");
    }
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) {
      throw FormatError(std::string(what_) + ": truncated payload");
    }
  }

  std::span<const std::byte> bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace semdedup::detail
