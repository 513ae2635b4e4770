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
#include <span>
#include <utility>
#include <vector>

#include "semdedup/embedding_store.hpp"

// Naive reference implementations. Nothing in here calls into the engine's
// kernels: every similarity is a plain sequential double-precision sum.
namespace semdedup::oracle {

double naive_cosine(std::span<const float> a, std::span<const float> b);

// Position p of `ordered` is kept iff the max cosine to every earlier
// position is <= 1 - epsilon. O(m^2) double loop, no tiling.
std::vector<std::uint8_t> brute_force_greedy_dedup(
    const UnitEmbeddingMatrix& e, std::span<const std::size_t> ordered,
    double epsilon);

// Every unordered pair of ids with cosine >= 1 - epsilon, as (smaller id,
// larger id), sorted.
std::vector<std::pair<std::uint64_t, std::uint64_t>> brute_force_duplicate_pairs(
    const UnitEmbeddingMatrix& e, double epsilon);

// Exhaustive argmax-cosine assignment, ties to the lowest centroid index.
std::vector<std::uint32_t> brute_force_assign(const UnitEmbeddingMatrix& e,
                                              std::span<const float> centroids);

struct PlantedCorpus {
  EmbeddingMatrix embeddings;
  std::vector<std::vector<std::uint64_t>> groups;  // ground-truth duplicates
  double within_sim;  // min cosine inside any group (1 if no such pair)
  double across_sim;  // max cosine across groups (-1 if single group)
};

struct PlantedOptions {
  std::size_t n_groups = 1;
  std::size_t group_size = 1;
  std::size_t dim = 8;
  double within_sim_target = 0.999;
  std::uint64_t seed = 0;
  // Centers are redrawn until their pairwise cosine stays below this cap.
  double max_center_cosine = 0.45;
  unsigned max_attempts = 16;
};

// Near-orthogonal unit centers, each surrounded by group_size near-copies
// whose pairwise cosine is at least within_sim_target. Rows are shuffled
// (ids = row index). The result is re-checked exhaustively; a margin
// violation retries with a tighter perturbation, and ConstructionError is
// raised after max_attempts.
PlantedCorpus generate_planted(const PlantedOptions& options);

}  // namespace semdedup::oracle
