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

#include "semdedup/analysis_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "kernels.hpp"
#include "parallel.hpp"
#include "semdedup/error.hpp"

namespace semdedup {

namespace {

void check_match(const UnitEmbeddingMatrix& e, const KMeansModel& model) {
  if (model.size() != e.rows() || model.dim() != e.dim()) {
    throw InvalidArgument("model does not match embeddings");
  }
}

void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw InvalidArgument("epsilon must lie in (0, 1), got " +
                          std::to_string(eps));
  }
}

double pair_cosine(const UnitEmbeddingMatrix& e, std::size_t a, std::size_t b) {
  return detail::dot(e.row(a).data(), e.row(b).data(), e.dim());
}

}  // namespace

std::uint64_t SimilarityHistogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

SimilarityHistogram similarity_histogram(const UnitEmbeddingMatrix& e,
                                         const KMeansModel& model,
                                         std::size_t bins, unsigned threads) {
  check_match(e, model);
  if (bins < 2) throw InvalidArgument("histogram needs at least 2 bins");
  const std::uint32_t k = model.k();
  std::vector<std::vector<std::uint64_t>> partial(k);
  const double scale = static_cast<double>(bins) / 2.0;
  const auto sk = static_cast<std::int64_t>(k);
#pragma omp parallel for num_threads(detail::resolve_threads(threads)) \
    schedule(dynamic, 1)
  for (std::int64_t sc = 0; sc < sk; ++sc) {
    const auto c = static_cast<std::uint32_t>(sc);
    const auto members = model.members(c);
    if (members.size() < 2) continue;
    auto& counts = partial[c];
    counts.assign(bins, 0);
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const double s = pair_cosine(e, members[a], members[b]);
        const double pos = std::floor((s + 1.0) * scale);
        const auto bin = static_cast<std::size_t>(
            std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
        ++counts[bin];
      }
    }
  }
  SimilarityHistogram h{std::vector<std::uint64_t>(bins, 0)};
  for (const auto& counts : partial) {
    for (std::size_t b = 0; b < counts.size(); ++b) h.counts[b] += counts[b];
  }
  return h;
}

double duplicate_incidence(const UnitEmbeddingMatrix& e,
                           const KMeansModel& model, double epsilon,
                           unsigned threads) {
  check_match(e, model);
  check_epsilon(epsilon);
  const double cut = 1.0 - epsilon;
  std::vector<std::uint8_t> has_dup(e.rows(), 0);
  const auto sk = static_cast<std::int64_t>(model.k());
#pragma omp parallel for num_threads(detail::resolve_threads(threads)) \
    schedule(dynamic, 1)
  for (std::int64_t sc = 0; sc < sk; ++sc) {
    const auto members = model.members(static_cast<std::uint32_t>(sc));
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        if (pair_cosine(e, members[a], members[b]) >= cut) {
          has_dup[members[a]] = 1;
          has_dup[members[b]] = 1;
        }
      }
    }
  }
  const auto flagged = std::count(has_dup.begin(), has_dup.end(), 1);
  return static_cast<double>(flagged) / static_cast<double>(e.rows());
}

double intersection_pct(std::span<const std::uint64_t> keep_a,
                        std::span<const std::uint64_t> keep_b, std::size_t n) {
  if (n == 0) throw InvalidArgument("intersection of empty sets is undefined");
  if (keep_a.size() != n || keep_b.size() != n) {
    throw InvalidArgument("intersection needs two sets of size n=" +
                          std::to_string(n) + ", got " +
                          std::to_string(keep_a.size()) + " and " +
                          std::to_string(keep_b.size()));
  }
  std::unordered_set<std::uint64_t> a(keep_a.begin(), keep_a.end());
  if (a.size() != n) throw InvalidArgument("first id set has repeated ids");
  std::unordered_set<std::uint64_t> b(keep_b.begin(), keep_b.end());
  if (b.size() != n) throw InvalidArgument("second id set has repeated ids");
  std::size_t shared = 0;
  for (auto id : keep_b) shared += a.count(id);
  return 100.0 * static_cast<double>(shared) / static_cast<double>(n);
}

EfficiencyReport dedup_efficiency(const UnitEmbeddingMatrix& e,
                                  const KMeansModel& model, double epsilon,
                                  std::uint32_t m_neighbors, unsigned threads) {
  check_match(e, model);
  check_epsilon(epsilon);
  const std::uint32_t k = model.k();
  EfficiencyReport report;
  if (k > 1 && (m_neighbors == 0 || m_neighbors >= k)) {
    throw InvalidArgument("neighbor count m=" + std::to_string(m_neighbors) +
                          " must be in [1, k-1] with k=" + std::to_string(k));
  }
  report.neighbors = k > 1 ? m_neighbors : 0;
  const double cut = 1.0 - epsilon;
  const int nthreads = detail::resolve_threads(threads);

  // Symmetrized neighbor relation, stored as the set of partners b > a.
  std::vector<std::vector<std::uint32_t>> partners(k);
  if (k > 1) {
    std::vector<std::vector<std::uint32_t>> lists(k);
    const auto sk = static_cast<std::int64_t>(k);
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (std::int64_t sc = 0; sc < sk; ++sc) {
      lists[static_cast<std::size_t>(sc)] =
          nearest_clusters(model, static_cast<std::uint32_t>(sc), m_neighbors);
    }
    for (std::uint32_t a = 0; a < k; ++a) {
      for (auto b : lists[a]) partners[std::min(a, b)].push_back(std::max(a, b));
    }
    for (auto& p : partners) {
      std::sort(p.begin(), p.end());
      p.erase(std::unique(p.begin(), p.end()), p.end());
    }
  }

  std::vector<std::uint64_t> within(k, 0);
  std::vector<std::uint64_t> across(k, 0);
  const auto sk = static_cast<std::int64_t>(k);
#pragma omp parallel for num_threads(nthreads) schedule(dynamic, 1)
  for (std::int64_t sc = 0; sc < sk; ++sc) {
    const auto a = static_cast<std::uint32_t>(sc);
    const auto ma = model.members(a);
    std::uint64_t w = 0;
    for (std::size_t i = 0; i < ma.size(); ++i) {
      for (std::size_t j = i + 1; j < ma.size(); ++j) {
        if (pair_cosine(e, ma[i], ma[j]) >= cut) ++w;
      }
    }
    std::uint64_t x = 0;
    for (auto b : partners[a]) {
      for (auto i : ma) {
        for (auto j : model.members(b)) {
          if (pair_cosine(e, i, j) >= cut) ++x;
        }
      }
    }
    within[a] = w;
    across[a] = x;
  }
  for (std::uint32_t c = 0; c < k; ++c) {
    report.within_pairs += within[c];
    report.candidate_pairs += within[c] + across[c];
  }
  report.eta = report.candidate_pairs == 0
                   ? 100.0
                   : 100.0 * static_cast<double>(report.within_pairs) /
                         static_cast<double>(report.candidate_pairs);
  return report;
}

std::vector<ClusterStat> per_cluster_stats(const DedupResult& result,
                                           const KMeansModel& model) {
  if (result.keep.size() != model.size() ||
      result.per_cluster_removed.size() != model.k()) {
    throw InvalidArgument("dedup result was not produced against this model");
  }
  std::vector<ClusterStat> out;
  out.reserve(model.k());
  for (std::uint32_t c = 0; c < model.k(); ++c) {
    const auto members = model.members(c);
    std::uint64_t removed = 0;
    for (auto i : members) removed += result.keep[i] ? 0 : 1;
    out.push_back({c, members.size(), removed,
                   members.empty() ? 0.0
                                   : static_cast<double>(removed) /
                                         static_cast<double>(members.size())});
  }
  return out;
}

MetricsReport build_metrics_report(const UnitEmbeddingMatrix& e,
                                   const KMeansModel& model,
                                   const DedupResult& result, double epsilon,
                                   const MetricsOptions& options) {
  MetricsReport r;
  r.epsilon = epsilon;
  r.similarity_histogram =
      similarity_histogram(e, model, options.bins, options.threads);
  r.duplicate_incidence =
      duplicate_incidence(e, model, epsilon, options.threads);
  r.per_cluster = per_cluster_stats(result, model);
  r.efficiency = dedup_efficiency(e, model, epsilon, options.neighbors,
                                  options.threads);
  return r;
}

}  // namespace semdedup
