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

#include "semdedup/embedding_store.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "byte_io.hpp"
#include "semdedup/error.hpp"

namespace semdedup {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kFormat: return "FormatError";
    case ErrorKind::kData: return "DataError";
    case ErrorKind::kDegenerateRow: return "DegenerateRowError";
    case ErrorKind::kBracket: return "BracketError";
    case ErrorKind::kConstruction: return "ConstructionError";
    case ErrorKind::kIo: return "IoError";
  }
  return "Error";
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<float> data,
                                 std::vector<std::uint64_t> ids)
    : dim_(dim), data_(std::move(data)), ids_(std::move(ids)) {
  if (dim_ == 0) throw InvalidArgument("embedding dimension must be >= 1");
  if (data_.empty() || data_.size() % dim_ != 0) {
    throw InvalidArgument("embedding data length " +
                          std::to_string(data_.size()) +
                          " is not a positive multiple of d=" +
                          std::to_string(dim_));
  }
  const std::size_t n = data_.size() / dim_;
  if (ids_.empty()) {
    ids_.resize(n);
    for (std::size_t i = 0; i < n; ++i) ids_[i] = i;
  } else if (ids_.size() != n) {
    throw InvalidArgument("got " + std::to_string(ids_.size()) +
                          " ids for " + std::to_string(n) + " rows");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw DataError("non-finite entry in row " + std::to_string(i / dim_),
                      i / dim_);
    }
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen.insert(ids_[i]).second) {
      throw DataError("duplicate id " + std::to_string(ids_[i]) +
                          " at row " + std::to_string(i),
                      i);
    }
  }
}

UnitEmbeddingMatrix UnitEmbeddingMatrix::from_unit_rows(EmbeddingMatrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    double sq = 0.0;
    for (float v : r) sq += static_cast<double>(v) * v;
    if (std::abs(std::sqrt(sq) - 1.0) > kNormTolerance) {
      throw DataError("row " + std::to_string(i) + " is not unit norm", i);
    }
  }
  return UnitEmbeddingMatrix(std::move(m));
}

std::vector<std::byte> encode_embeddings(const EmbeddingMatrix& m) {
  detail::ByteWriter w;
  w.magic("SEMD");
  w.put<std::uint32_t>(kEmbeddingFormatVersion);
  w.put<std::uint64_t>(m.rows());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.dim()));
  w.put<std::uint32_t>(kDtypeFloat32);
  w.put_array(m.data());
  w.put_array(m.ids());
  return std::move(w).take();
}

EmbeddingMatrix decode_embeddings(std::span<const std::byte> bytes) {
  detail::ByteReader r(bytes, "SEMD1");
  r.expect_magic("SEMD");
  const auto version = r.get<std::uint32_t>();
  if (version != kEmbeddingFormatVersion) {
    throw FormatError("SEMD1: unsupported version " + std::to_string(version));
  }
  const auto n = r.get<std::uint64_t>();
  const auto d = r.get<std::uint32_t>();
  const auto dtype = r.get<std::uint32_t>();
  if (dtype != kDtypeFloat32) {
    throw FormatError("SEMD1: unsupported dtype code " + std::to_string(dtype));
  }
  if (n == 0 || d == 0) throw FormatError("SEMD1: empty matrix header");
  if (n > r.remaining() / d) throw FormatError("SEMD1: truncated payload");
  auto data = r.get_array<float>(n * d);
  auto ids = r.get_array<std::uint64_t>(n);
  r.expect_end();
  return EmbeddingMatrix(d, std::move(data), std::move(ids));
}

EmbeddingMatrix parse_text_embeddings(std::string_view text) {
  std::vector<float> data;
  std::size_t dim = 0;
  std::size_t row = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    ++line_no;
    std::size_t count = 0;
    std::size_t pos = 0;
    while (true) {
      while (pos < line.size() &&
             (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) {
        ++pos;
      }
      if (pos >= line.size()) break;
      float v = 0.0f;
      const char* first = line.data() + pos;
      const char* last = line.data() + line.size();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} ||
          (ptr != last && *ptr != ' ' && *ptr != '\t' && *ptr != '\r')) {
        throw FormatError("text embeddings: unparsable value on line " +
                          std::to_string(line_no));
      }
      if (!std::isfinite(v)) {
        throw DataError("non-finite entry in row " + std::to_string(row), row);
      }
      data.push_back(v);
      ++count;
      pos = static_cast<std::size_t>(ptr - line.data());
    }
    if (count == 0) continue;
    if (dim == 0) dim = count;
    if (count != dim) {
      throw FormatError("text embeddings: line " + std::to_string(line_no) +
                        " has " + std::to_string(count) +
                        " values, expected " + std::to_string(dim));
    }
    ++row;
  }
  if (row == 0) throw FormatError("text embeddings: no rows");
  return EmbeddingMatrix(dim, std::move(data));
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                EmbeddingFormat format) {
  const auto bytes = read_file_bytes(path);
  if (format == EmbeddingFormat::kBinary) return decode_embeddings(bytes);
  return parse_text_embeddings(std::string_view(
      reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void save_embeddings(const EmbeddingMatrix& m,
                     const std::filesystem::path& path) {
  write_file_bytes(path, encode_embeddings(m));
}

UnitEmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
  std::vector<float> out(m.data().begin(), m.data().end());
  const std::size_t d = m.dim();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    float* r = out.data() + i * d;
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += static_cast<double>(r[j]) * r[j];
    const double norm = std::sqrt(sq);
    if (norm < 1e-12) {
      throw DegenerateRowError(
          "row " + std::to_string(i) + " has zero norm; cosine is undefined",
          i);
    }
    for (std::size_t j = 0; j < d; ++j) {
      r[j] = static_cast<float>(static_cast<double>(r[j]) / norm);
    }
  }
  std::vector<std::uint64_t> ids(m.ids().begin(), m.ids().end());
  return UnitEmbeddingMatrix(EmbeddingMatrix(d, std::move(out), std::move(ids)));
}

std::size_t write_subset(const EmbeddingMatrix& m,
                         std::span<const std::uint64_t> keep_ids,
                         const std::filesystem::path& path) {
  if (keep_ids.empty()) {
    throw InvalidArgument("write_subset: empty subset is not allowed");
  }
  std::unordered_map<std::uint64_t, std::size_t> row_of;
  row_of.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) row_of.emplace(m.id(i), i);

  std::vector<std::uint8_t> selected(m.rows(), 0);
  for (const auto id : keep_ids) {
    const auto it = row_of.find(id);
    if (it == row_of.end()) {
      throw DataError("write_subset: unknown id " + std::to_string(id));
    }
    if (selected[it->second]) {
      throw InvalidArgument("write_subset: id " + std::to_string(id) +
                            " listed twice");
    }
    selected[it->second] = 1;
  }

  std::vector<float> data;
  std::vector<std::uint64_t> ids;
  data.reserve(keep_ids.size() * m.dim());
  ids.reserve(keep_ids.size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!selected[i]) continue;
    const auto r = m.row(i);
    data.insert(data.end(), r.begin(), r.end());
    ids.push_back(m.id(i));
  }
  save_embeddings(EmbeddingMatrix(m.dim(), std::move(data), std::move(ids)),
                  path);
  return keep_ids.size();
}

}  // namespace semdedup
