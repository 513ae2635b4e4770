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

#include "semdedup/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "semdedup/error.hpp"
#include "semdedup/rng.hpp"

namespace semdedup::oracle {

double naive_cosine(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    s += static_cast<double>(a[j]) * static_cast<double>(b[j]);
  }
  return s;
}

std::vector<std::uint8_t> brute_force_greedy_dedup(
    const UnitEmbeddingMatrix& e, std::span<const std::size_t> ordered,
    double epsilon) {
  std::vector<std::uint8_t> keep(ordered.size(), 1);
  for (std::size_t p = 0; p < ordered.size(); ++p) {
    double m = 0.0;
    for (std::size_t q = 0; q < p; ++q) {
      const double s = naive_cosine(e.row(ordered[q]), e.row(ordered[p]));
      if (s > m) m = s;
    }
    keep[p] = m <= 1.0 - epsilon ? 1 : 0;
  }
  return keep;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> brute_force_duplicate_pairs(
    const UnitEmbeddingMatrix& e, double epsilon) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::size_t a = 0; a < e.rows(); ++a) {
    for (std::size_t b = a + 1; b < e.rows(); ++b) {
      if (naive_cosine(e.row(a), e.row(b)) >= 1.0 - epsilon) {
        out.emplace_back(std::min(e.id(a), e.id(b)), std::max(e.id(a), e.id(b)));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> brute_force_assign(const UnitEmbeddingMatrix& e,
                                              std::span<const float> centroids) {
  const std::size_t d = e.dim();
  const std::size_t k = centroids.size() / d;
  std::vector<std::uint32_t> out(e.rows());
  for (std::size_t i = 0; i < e.rows(); ++i) {
    std::uint32_t best = 0;
    double best_sim = naive_cosine(e.row(i), centroids.subspan(0, d));
    for (std::size_t c = 1; c < k; ++c) {
      const double s = naive_cosine(e.row(i), centroids.subspan(c * d, d));
      if (s > best_sim) {
        best_sim = s;
        best = static_cast<std::uint32_t>(c);
      }
    }
    out[i] = best;
  }
  return out;
}

namespace {

std::vector<double> random_unit(Xoshiro256StarStar& rng, std::size_t d) {
  std::vector<double> v(d);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      sq += x * x;
    }
  } while (sq < 1e-20);
  const double norm = std::sqrt(sq);
  for (auto& x : v) x /= norm;
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

}  // namespace

PlantedCorpus generate_planted(const PlantedOptions& o) {
  if (o.dim < 8) throw InvalidArgument("planted corpus needs d >= 8");
  if (o.n_groups == 0 || o.group_size == 0) {
    throw InvalidArgument("planted corpus needs at least one group and member");
  }
  if (!(o.within_sim_target > 0.0 && o.within_sim_target < 1.0)) {
    throw InvalidArgument("within_sim_target must lie in (0, 1)");
  }
  const std::size_t d = o.dim;
  const std::size_t n = o.n_groups * o.group_size;
  const double t = o.within_sim_target;

  for (unsigned attempt = 0; attempt < o.max_attempts; ++attempt) {
    Xoshiro256StarStar rng(mix_keys(o.seed, attempt));

    std::vector<std::vector<double>> centers;
    centers.reserve(o.n_groups);
    bool centers_ok = true;
    for (std::size_t g = 0; g < o.n_groups && centers_ok; ++g) {
      bool placed = false;
      for (int tries = 0; tries < 1000 && !placed; ++tries) {
        auto c = random_unit(rng, d);
        placed = std::all_of(centers.begin(), centers.end(), [&](const auto& o2) {
          return dot(c, o2) < o.max_center_cosine;
        });
        if (placed) centers.push_back(std::move(c));
      }
      centers_ok = placed;
    }
    if (!centers_ok) continue;

    // Two members at perturbation norm s have cosine >= (1 - s^2)/(1 + s^2)
    // when their offsets are orthogonal to the center.
    const double shrink = std::pow(0.5, attempt);
    const double sigma = 0.9 * shrink * std::sqrt((1.0 - t) / (1.0 + t));

    std::vector<std::size_t> position(n);
    std::iota(position.begin(), position.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
      std::swap(position[i - 1], position[rng() % i]);
    }

    std::vector<float> data(n * d);
    std::vector<std::vector<std::uint64_t>> groups(o.n_groups);
    std::vector<std::size_t> group_of(n);
    std::size_t slot = 0;
    for (std::size_t g = 0; g < o.n_groups; ++g) {
      const auto& c = centers[g];
      for (std::size_t m = 0; m < o.group_size; ++m, ++slot) {
        auto r = random_unit(rng, d);
        const double along = dot(r, c);
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          r[j] -= along * c[j];
          sq += r[j] * r[j];
        }
        const double rn = std::sqrt(sq);
        std::vector<double> x(d);
        double xsq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          x[j] = c[j] + (rn > 0 ? sigma * r[j] / rn : 0.0);
          xsq += x[j] * x[j];
        }
        const double xn = std::sqrt(xsq);
        const std::size_t row = position[slot];
        for (std::size_t j = 0; j < d; ++j) {
          data[row * d + j] = static_cast<float>(x[j] / xn);
        }
        groups[g].push_back(row);
        group_of[row] = g;
      }
      std::sort(groups[g].begin(), groups[g].end());
    }

    EmbeddingMatrix m(d, std::move(data));
    double within = 1.0;
    double across = -1.0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double s = naive_cosine(m.row(a), m.row(b));
        if (group_of[a] == group_of[b]) {
          within = std::min(within, s);
        } else {
          across = std::max(across, s);
        }
      }
    }
    if (within >= t && within > across) {
      return PlantedCorpus{std::move(m), std::move(groups), within, across};
    }
  }
  throw ConstructionError(
      "could not build a planted corpus with " + std::to_string(o.n_groups) +
      " groups in d=" + std::to_string(o.dim) + " after " +
      std::to_string(o.max_attempts) + " attempts");
}

}  // namespace semdedup::oracle
