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
#include <vector>

#include "semdedup/embedding_store.hpp"

namespace semdedup {

// k unit-norm centroids plus the assignment of every point to one of them.
// Member lists are derived from the assignment and kept sorted by point index.
class KMeansModel {
 public:
  static constexpr double kCentroidNormTolerance = 1e-6;

  KMeansModel(std::size_t dim, std::vector<float> centroids,
              std::vector<std::uint32_t> assignment,
              std::vector<double> objective_trace = {});

  std::uint32_t k() const noexcept { return k_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return assignment_.size(); }

  std::span<const float> centroids() const noexcept { return centroids_; }
  std::span<const float> centroid(std::uint32_t c) const noexcept {
    return {centroids_.data() + static_cast<std::size_t>(c) * dim_, dim_};
  }
  std::span<const std::uint32_t> assignment() const noexcept {
    return assignment_;
  }
  std::span<const std::size_t> members(std::uint32_t c) const noexcept {
    return {members_.data() + offsets_[c], offsets_[c + 1] - offsets_[c]};
  }
  // Mean cosine to the assigned centroid after each assignment step.
  std::span<const double> objective_trace() const noexcept {
    return objective_trace_;
  }

 private:
  std::size_t dim_;
  std::uint32_t k_;
  std::vector<float> centroids_;
  std::vector<std::uint32_t> assignment_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> members_;
  std::vector<double> objective_trace_;
};

struct KMeansOptions {
  std::uint32_t k = 1;
  std::uint32_t iterations = 100;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

// Spherical k-means: k-means++ seeding keyed on (seed, point id), then
// alternating argmax-cosine assignment and normalized-mean centroid updates.
// Stops early once an assignment step changes nothing. Empty clusters take
// the point with the lowest cosine to its own centroid.
KMeansModel fit(const UnitEmbeddingMatrix& e, const KMeansOptions& options);

// Per-point argmax of dot(e_i, centroid_c); ties go to the lowest c.
std::vector<std::uint32_t> assign(const UnitEmbeddingMatrix& e,
                                  std::span<const float> centroids,
                                  unsigned threads = 0);

// The m clusters other than c whose centroids are most cosine-similar to c's,
// in descending similarity, ties by lowest index.
std::vector<std::uint32_t> nearest_clusters(const KMeansModel& model,
                                            std::uint32_t c, std::uint32_t m);

// SEMK1 layout, little-endian:
//   "SEMK" | u32 version=1 | u32 k | u32 d | k*d float32 centroids
//   | u64 n | n u32 assignments
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::byte> encode_model(const KMeansModel& model);
KMeansModel decode_model(std::span<const std::byte> bytes);
void save_model(const KMeansModel& model, const std::filesystem::path& path);
KMeansModel load_model(const std::filesystem::path& path);

}  // namespace semdedup
