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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace semdedup {

enum class EmbeddingFormat { kBinary, kText };

// Dense n x d row-major float32 matrix with one stable 64-bit id per row.
//
// Construction validates the invariants: n >= 1, d >= 1, data.size() == n*d,
// every entry finite and ids unique. An empty `ids` vector means 0..n-1.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::size_t dim, std::vector<float> data,
                  std::vector<std::uint64_t> ids = {});

  std::size_t rows() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const std::uint64_t> ids() const noexcept { return ids_; }
  std::uint64_t id(std::size_t i) const noexcept { return ids_[i]; }

  friend bool operator==(const EmbeddingMatrix&,
                         const EmbeddingMatrix&) = default;

 private:
  std::size_t dim_;
  std::vector<float> data_;
  std::vector<std::uint64_t> ids_;
};

// An EmbeddingMatrix whose rows all have L2 norm within 1e-5 of 1.
class UnitEmbeddingMatrix {
 public:
  static constexpr double kNormTolerance = 1e-5;

  // Checks the unit-norm invariant; throws DataError naming the first row
  // that violates it.
  static UnitEmbeddingMatrix from_unit_rows(EmbeddingMatrix m);

  const EmbeddingMatrix& matrix() const noexcept { return m_; }
  std::size_t rows() const noexcept { return m_.rows(); }
  std::size_t dim() const noexcept { return m_.dim(); }
  std::span<const float> row(std::size_t i) const noexcept {
    return m_.row(i);
  }
  std::span<const std::uint64_t> ids() const noexcept { return m_.ids(); }
  std::uint64_t id(std::size_t i) const noexcept { return m_.id(i); }

 private:
  explicit UnitEmbeddingMatrix(EmbeddingMatrix m) : m_(std::move(m)) {}
  friend UnitEmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

  EmbeddingMatrix m_;
};

// SEMD1 binary layout, little-endian:
//   "SEMD" | u32 version=1 | u64 n | u32 d | u32 dtype=1 (float32)
//   | n*d float32 row-major | n u64 ids
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;
inline constexpr std::uint32_t kDtypeFloat32 = 1;

std::vector<std::byte> encode_embeddings(const EmbeddingMatrix& m);
EmbeddingMatrix decode_embeddings(std::span<const std::byte> bytes);

EmbeddingMatrix parse_text_embeddings(std::string_view text);

EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                EmbeddingFormat format);
void save_embeddings(const EmbeddingMatrix& m,
                     const std::filesystem::path& path);

// Divides every row by its L2 norm (accumulated in double). Rows with norm
// below 1e-12 raise DegenerateRowError.
UnitEmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

// Writes the rows whose ids appear in `keep_ids`, in the matrix's original
// row order, as a SEMD1 file. Returns the number of rows written.
std::size_t write_subset(const EmbeddingMatrix& m,
                         std::span<const std::uint64_t> keep_ids,
                         const std::filesystem::path& path);

// Reads/writes whole files; IoError on failure.
std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes);

}  // namespace semdedup
