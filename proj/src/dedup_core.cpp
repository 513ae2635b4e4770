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

#include "semdedup/dedup_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kernels.hpp"
#include "parallel.hpp"
#include "semdedup/error.hpp"
#include "semdedup/rng.hpp"

namespace semdedup {

std::string_view to_string(KeepStrategy s) noexcept {
  switch (s) {
    case KeepStrategy::kLowCentroidSim: return "low";
    case KeepStrategy::kHighCentroidSim: return "high";
    case KeepStrategy::kRandom: return "random";
  }
  return "low";
}

KeepStrategy parse_keep_strategy(std::string_view name) {
  if (name == "low" || name == "LowCentroidSim" || name == "KeepLowCentroidSim") {
    return KeepStrategy::kLowCentroidSim;
  }
  if (name == "high" || name == "HighCentroidSim" ||
      name == "KeepHighCentroidSim") {
    return KeepStrategy::kHighCentroidSim;
  }
  if (name == "random" || name == "Random" || name == "KeepRandom") {
    return KeepStrategy::kRandom;
  }
  throw InvalidArgument("unknown keep strategy '" + std::string(name) +
                        "' (expected low, high or random)");
}

void DedupConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InvalidArgument("epsilon must lie in (0, 1), got " +
                          std::to_string(epsilon));
  }
  if (tile == 0) throw InvalidArgument("tile must be >= 1");
}

namespace {

std::uint64_t pair_count(std::size_t m) {
  return static_cast<std::uint64_t>(m) * (m == 0 ? 0 : m - 1) / 2;
}

}  // namespace

std::vector<std::size_t> order_cluster(const UnitEmbeddingMatrix& e,
                                       std::span<const std::size_t> members,
                                       std::span<const float> centroid,
                                       KeepStrategy strategy,
                                       std::uint64_t seed,
                                       std::uint32_t cluster_id) {
  if (centroid.size() != e.dim()) {
    throw InvalidArgument("centroid dimension does not match embeddings");
  }
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(members.size());
  for (auto i : members) {
    double key = 0.0;
    switch (strategy) {
      case KeepStrategy::kLowCentroidSim:
        key = detail::dot(e.row(i).data(), centroid.data(), e.dim());
        break;
      case KeepStrategy::kHighCentroidSim:
        key = -detail::dot(e.row(i).data(), centroid.data(), e.dim());
        break;
      case KeepStrategy::kRandom:
        key = to_unit_open(mix_keys(seed, cluster_id, e.id(i)));
        break;
    }
    keyed.emplace_back(key, i);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> out(keyed.size());
  for (std::size_t p = 0; p < keyed.size(); ++p) out[p] = keyed[p].second;
  return out;
}

std::vector<double> prefix_max_similarity(const UnitEmbeddingMatrix& e,
                                          std::span<const std::size_t> ordered,
                                          std::size_t tile) {
  if (tile == 0) throw InvalidArgument("tile must be >= 1");
  const std::size_t m = ordered.size();
  const std::size_t d = e.dim();
  std::vector<double> best(m, 0.0);
  if (m < 2) return best;

  std::vector<float> rows(m * d);
  for (std::size_t p = 0; p < m; ++p) {
    const auto r = e.row(ordered[p]);
    std::copy(r.begin(), r.end(), rows.begin() + static_cast<std::ptrdiff_t>(p * d));
  }

  for (std::size_t p0 = 0; p0 < m; p0 += tile) {
    const std::size_t p1 = std::min(m, p0 + tile);
    for (std::size_t q0 = 0; q0 < p1; q0 += tile) {
      const std::size_t q1 = std::min(p1, q0 + tile);
      for (std::size_t p = std::max(p0, q0 + 1); p < p1; ++p) {
        const float* x = rows.data() + p * d;
        double acc = best[p];
        const std::size_t qe = std::min(q1, p);
        for (std::size_t q = q0; q < qe; ++q) {
          acc = std::max(acc, detail::dot(rows.data() + q * d, x, d));
        }
        best[p] = acc;
      }
    }
  }
  return best;
}

ClusterVerdict dedup_cluster(const UnitEmbeddingMatrix& e,
                             std::span<const std::size_t> ordered,
                             double epsilon, std::size_t tile) {
  DedupConfig{epsilon, KeepStrategy::kLowCentroidSim, 0, tile, 0}.validate();
  const auto best = prefix_max_similarity(e, ordered, tile);
  ClusterVerdict v;
  v.keep.resize(ordered.size());
  for (std::size_t p = 0; p < ordered.size(); ++p) {
    v.keep[p] = best[p] <= 1.0 - epsilon ? 1 : 0;
  }
  v.comparisons = pair_count(ordered.size());
  return v;
}

PrefixMaxProfile::PrefixMaxProfile(std::vector<double> max_sim,
                                   std::vector<std::uint8_t> covered,
                                   std::vector<std::uint32_t> clusters,
                                   std::uint64_t comparisons)
    : max_sim_(std::move(max_sim)),
      covered_(std::move(covered)),
      clusters_(std::move(clusters)),
      covered_count_(static_cast<std::size_t>(
          std::count(covered_.begin(), covered_.end(), std::uint8_t{1}))),
      comparisons_(comparisons) {}

std::size_t PrefixMaxProfile::kept_at(double epsilon) const {
  std::size_t kept = 0;
  for (std::size_t i = 0; i < max_sim_.size(); ++i) {
    if (covered_[i] && keeps(i, epsilon)) ++kept;
  }
  return kept;
}

double PrefixMaxProfile::kept_fraction_at(double epsilon) const {
  if (covered_count_ == 0) {
    throw InvalidArgument("profile covers no points");
  }
  return static_cast<double>(kept_at(epsilon)) /
         static_cast<double>(covered_count_);
}

PrefixMaxProfile prefix_max_profile(
    const UnitEmbeddingMatrix& e, const KMeansModel& model,
    KeepStrategy strategy, std::uint64_t seed, std::size_t tile,
    unsigned threads, std::optional<std::span<const std::uint32_t>> clusters) {
  if (model.size() != e.rows() || model.dim() != e.dim()) {
    throw InvalidArgument(
        "model (n=" + std::to_string(model.size()) + ", d=" +
        std::to_string(model.dim()) + ") does not match embeddings (n=" +
        std::to_string(e.rows()) + ", d=" + std::to_string(e.dim()) + ")");
  }
  if (tile == 0) throw InvalidArgument("tile must be >= 1");

  std::vector<std::uint32_t> todo;
  if (clusters) {
    todo.assign(clusters->begin(), clusters->end());
    for (auto c : todo) {
      if (c >= model.k()) {
        throw InvalidArgument("cluster " + std::to_string(c) +
                              " out of range for k=" +
                              std::to_string(model.k()));
      }
    }
    std::sort(todo.begin(), todo.end());
    if (std::adjacent_find(todo.begin(), todo.end()) != todo.end()) {
      throw InvalidArgument("cluster list contains duplicates");
    }
  } else {
    todo.resize(model.k());
    std::iota(todo.begin(), todo.end(), 0u);
  }

  std::vector<double> max_sim(e.rows(), 0.0);
  std::vector<std::uint8_t> covered(e.rows(), 0);
  const int nthreads = detail::resolve_threads(threads);
  const auto st = static_cast<std::int64_t>(todo.size());
#pragma omp parallel for num_threads(nthreads) schedule(dynamic, 1)
  for (std::int64_t si = 0; si < st; ++si) {
    const std::uint32_t c = todo[static_cast<std::size_t>(si)];
    const auto members = model.members(c);
    if (members.empty()) continue;
    const auto ordered =
        order_cluster(e, members, model.centroid(c), strategy, seed, c);
    const auto best = prefix_max_similarity(e, ordered, tile);
    for (std::size_t p = 0; p < ordered.size(); ++p) {
      max_sim[ordered[p]] = best[p];
      covered[ordered[p]] = 1;
    }
  }

  std::uint64_t comparisons = 0;
  for (auto c : todo) comparisons += pair_count(model.members(c).size());
  return PrefixMaxProfile(std::move(max_sim), std::move(covered),
                          std::move(todo), comparisons);
}

DedupResult apply_threshold(const PrefixMaxProfile& profile,
                            const KMeansModel& model, double epsilon) {
  if (profile.covered_count() != model.size()) {
    throw InvalidArgument("profile does not cover every point");
  }
  DedupResult r;
  const std::size_t n = model.size();
  r.keep.resize(n);
  r.per_cluster_removed.assign(model.k(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    r.keep[i] = profile.keeps(i, epsilon) ? 1 : 0;
    if (r.keep[i]) {
      ++r.kept;
    } else {
      ++r.per_cluster_removed[model.assignment()[i]];
    }
  }
  r.kept_fraction = static_cast<double>(r.kept) / static_cast<double>(n);
  r.comparisons = profile.comparisons();
  return r;
}

DedupResult dedup_dataset(const UnitEmbeddingMatrix& e,
                          const KMeansModel& model, const DedupConfig& cfg) {
  cfg.validate();
  const auto profile = prefix_max_profile(e, model, cfg.strategy, cfg.seed,
                                          cfg.tile, cfg.threads);
  return apply_threshold(profile, model, cfg.epsilon);
}

std::vector<std::uint8_t> keep_to_size(const PrefixMaxProfile& profile,
                                       std::size_t count) {
  const auto sims = profile.max_similarity();
  const auto covered = profile.covered();
  std::vector<std::size_t> idx;
  idx.reserve(profile.covered_count());
  for (std::size_t i = 0; i < sims.size(); ++i) {
    if (covered[i]) idx.push_back(i);
  }
  if (count == 0 || count > idx.size()) {
    throw InvalidArgument("keep_to_size: count " + std::to_string(count) +
                          " outside [1, " + std::to_string(idx.size()) + "]");
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return sims[a] < sims[b];
  });
  std::vector<std::uint8_t> keep(sims.size(), 0);
  for (std::size_t j = 0; j < count; ++j) keep[idx[j]] = 1;
  return keep;
}

}  // namespace semdedup
