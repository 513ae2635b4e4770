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

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semdedup/embedding_store.hpp"
#include "semdedup/oracle.hpp"
#include "semdedup/rng.hpp"

namespace semdedup::testing {

// n random directions in d dimensions, plus `dups` extra rows that are
// small perturbations of earlier rows so that thresholds have work to do.
inline UnitEmbeddingMatrix random_corpus(std::size_t n, std::size_t d,
                                         std::uint64_t seed,
                                         double dup_share = 0.0,
                                         double noise = 0.02) {
  Xoshiro256StarStar rng(seed);
  std::vector<float> data(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const bool copy = i > 0 && rng.uniform() < dup_share;
    const std::size_t src = copy ? rng() % i : i;
    for (std::size_t j = 0; j < d; ++j) {
      data[i * d + j] = copy ? static_cast<float>(data[src * d + j] +
                                                  noise * rng.normal())
                             : static_cast<float>(rng.normal());
    }
  }
  return normalize_rows(EmbeddingMatrix(d, std::move(data)));
}

inline UnitEmbeddingMatrix unit_rows(std::size_t d, std::vector<float> data) {
  return normalize_rows(EmbeddingMatrix(d, std::move(data)));
}

inline UnitEmbeddingMatrix planted_unit(const oracle::PlantedCorpus& c) {
  return normalize_rows(c.embeddings);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("semdedup_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace semdedup::testing
