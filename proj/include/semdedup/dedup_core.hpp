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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "semdedup/embedding_store.hpp"
#include "semdedup/spherical_kmeans.hpp"

namespace semdedup {

// Which member of a duplicate group survives. The strategy only decides the
// order in which a cluster is scanned; the greedy rule keeps the first.
enum class KeepStrategy {
  kLowCentroidSim,   // most atypical member (ascending cosine to centroid)
  kHighCentroidSim,  // most prototypical member
  kRandom,           // seeded permutation keyed on (seed, cluster, id)
};

std::string_view to_string(KeepStrategy s) noexcept;
// Accepts "low", "high", "random" (and the enum spellings without the k).
KeepStrategy parse_keep_strategy(std::string_view name);

struct DedupConfig {
  double epsilon = 0.05;
  KeepStrategy strategy = KeepStrategy::kLowCentroidSim;
  std::uint64_t seed = 0;
  std::size_t tile = 1024;
  unsigned threads = 0;

  // epsilon must lie in the open interval (0, 1); tile >= 1.
  void validate() const;
};

struct DedupResult {
  std::vector<std::uint8_t> keep;  // per point, 1 = kept
  std::size_t kept = 0;
  double kept_fraction = 0.0;
  std::vector<std::uint64_t> per_cluster_removed;
  std::uint64_t comparisons = 0;
};

struct ClusterVerdict {
  std::vector<std::uint8_t> keep;  // per position of `ordered`
  std::uint64_t comparisons = 0;
};

// Scan order for one cluster. Sorted strategies break cosine ties by
// ascending point index.
std::vector<std::size_t> order_cluster(const UnitEmbeddingMatrix& e,
                                       std::span<const std::size_t> members,
                                       std::span<const float> centroid,
                                       KeepStrategy strategy,
                                       std::uint64_t seed,
                                       std::uint32_t cluster_id = 0);

// For each position p, max over q < p of cos(e[ordered[q]], e[ordered[p]]),
// with 0 for p = 0 (and as the floor everywhere, matching an upper-triangular
// similarity matrix whose lower part is zero-filled). Computed tile by tile;
// the full similarity matrix is never materialized.
std::vector<double> prefix_max_similarity(const UnitEmbeddingMatrix& e,
                                          std::span<const std::size_t> ordered,
                                          std::size_t tile = 1024);

// Greedy prefix rule: position p is kept iff its prefix max <= 1 - epsilon.
// A removed point still suppresses later points.
ClusterVerdict dedup_cluster(const UnitEmbeddingMatrix& e,
                             std::span<const std::size_t> ordered,
                             double epsilon, std::size_t tile = 1024);

// Prefix maxima for every point of the covered clusters, in point index
// order. Since the scan order does not depend on epsilon, one profile answers
// the keep/remove question for any threshold.
class PrefixMaxProfile {
 public:
  PrefixMaxProfile(std::vector<double> max_sim, std::vector<std::uint8_t> covered,
                   std::vector<std::uint32_t> clusters, std::uint64_t comparisons);

  std::span<const double> max_similarity() const noexcept { return max_sim_; }
  std::span<const std::uint8_t> covered() const noexcept { return covered_; }
  std::span<const std::uint32_t> clusters() const noexcept { return clusters_; }
  std::size_t covered_count() const noexcept { return covered_count_; }
  std::uint64_t comparisons() const noexcept { return comparisons_; }

  bool keeps(std::size_t i, double epsilon) const noexcept {
    return max_sim_[i] <= 1.0 - epsilon;
  }
  std::size_t kept_at(double epsilon) const;
  double kept_fraction_at(double epsilon) const;

 private:
  std::vector<double> max_sim_;
  std::vector<std::uint8_t> covered_;
  std::vector<std::uint32_t> clusters_;
  std::size_t covered_count_;
  std::uint64_t comparisons_;
};

// Builds the profile over `clusters` (all clusters when nullopt), processing
// clusters in parallel.
PrefixMaxProfile prefix_max_profile(
    const UnitEmbeddingMatrix& e, const KMeansModel& model,
    KeepStrategy strategy, std::uint64_t seed, std::size_t tile,
    unsigned threads,
    std::optional<std::span<const std::uint32_t>> clusters = std::nullopt);

DedupResult dedup_dataset(const UnitEmbeddingMatrix& e,
                          const KMeansModel& model, const DedupConfig& cfg);

// Keep-mask evaluation of a full-coverage profile at one threshold.
DedupResult apply_threshold(const PrefixMaxProfile& profile,
                            const KMeansModel& model, double epsilon);

// Keeps exactly `count` points: the ones with the smallest prefix maxima
// (ties by point index). Equivalent to the threshold rule at the epsilon that
// admits precisely `count` points, when such an epsilon exists.
std::vector<std::uint8_t> keep_to_size(const PrefixMaxProfile& profile,
                                       std::size_t count);

}  // namespace semdedup
