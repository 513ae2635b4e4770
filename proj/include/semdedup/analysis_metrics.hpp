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
#include <vector>

#include "semdedup/dedup_core.hpp"

namespace semdedup {

// Fixed-width bins over [-1, 1]; bin b covers [-1 + 2b/B, -1 + 2(b+1)/B),
// the last bin is closed at 1.
struct SimilarityHistogram {
  std::vector<std::uint64_t> counts;

  std::size_t bins() const noexcept { return counts.size(); }
  double bin_lo(std::size_t b) const noexcept {
    return -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(bins());
  }
  double bin_hi(std::size_t b) const noexcept { return bin_lo(b + 1); }
  std::uint64_t total() const noexcept;
};

inline constexpr std::size_t kDefaultHistogramBins = 200;
inline constexpr std::uint32_t kDefaultNeighborClusters = 20;

// Histogram of cosine similarity over every unordered within-cluster pair.
SimilarityHistogram similarity_histogram(const UnitEmbeddingMatrix& e,
                                         const KMeansModel& model,
                                         std::size_t bins = kDefaultHistogramBins,
                                         unsigned threads = 0);

// Fraction of points with at least one same-cluster neighbor at cosine
// >= 1 - epsilon.
double duplicate_incidence(const UnitEmbeddingMatrix& e,
                           const KMeansModel& model, double epsilon,
                           unsigned threads = 0);

// 100 * |a ∩ b| / n for two id sets of equal size n.
double intersection_pct(std::span<const std::uint64_t> keep_a,
                        std::span<const std::uint64_t> keep_b, std::size_t n);

struct EfficiencyReport {
  double eta = 100.0;               // percentage
  std::uint64_t within_pairs = 0;   // duplicate pairs inside one cluster
  std::uint64_t candidate_pairs = 0;  // within + pairs across neighbor clusters
  std::uint32_t neighbors = 0;
};

// Duplicate pairs (cosine >= 1 - epsilon) found inside clusters, as a share
// of those found inside clusters or across neighboring clusters. Clusters a
// and b are neighbors when either lists the other among its m nearest
// centroids. With k = 1 there is nothing to miss and eta is 100.
EfficiencyReport dedup_efficiency(const UnitEmbeddingMatrix& e,
                                  const KMeansModel& model, double epsilon,
                                  std::uint32_t m_neighbors =
                                      kDefaultNeighborClusters,
                                  unsigned threads = 0);

struct ClusterStat {
  std::uint32_t cluster;
  std::uint64_t size;
  std::uint64_t removed;
  double removed_fraction;
};

std::vector<ClusterStat> per_cluster_stats(const DedupResult& result,
                                           const KMeansModel& model);

struct MetricsReport {
  double epsilon = 0.0;
  SimilarityHistogram similarity_histogram;
  double duplicate_incidence = 0.0;
  std::vector<ClusterStat> per_cluster;
  EfficiencyReport efficiency;
  std::optional<double> intersection;
};

struct MetricsOptions {
  std::size_t bins = kDefaultHistogramBins;
  std::uint32_t neighbors = kDefaultNeighborClusters;
  unsigned threads = 0;
};

MetricsReport build_metrics_report(const UnitEmbeddingMatrix& e,
                                   const KMeansModel& model,
                                   const DedupResult& result, double epsilon,
                                   const MetricsOptions& options = {});

}  // namespace semdedup
