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

#include "semdedup/spherical_kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "byte_io.hpp"
#include "kernels.hpp"
#include "parallel.hpp"
#include "semdedup/error.hpp"
#include "semdedup/rng.hpp"

namespace semdedup {

namespace {

constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

// Writes sum/||sum|| into `dst`. Returns false when the sum vanishes.
bool store_normalized(std::span<const double> sum, float* dst) {
  double sq = 0.0;
  for (double v : sum) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm > 1e-30)) return false;
  for (std::size_t j = 0; j < sum.size(); ++j) {
    dst[j] = static_cast<float>(sum[j] / norm);
  }
  return true;
}

void copy_point_as_centroid(const UnitEmbeddingMatrix& e, std::size_t i,
                            float* dst) {
  const auto r = e.row(i);
  std::vector<double> tmp(r.begin(), r.end());
  store_normalized(tmp, dst);
}

struct AssignOutput {
  std::vector<std::uint32_t> cluster;
  std::vector<double> cosine;
};

AssignOutput assign_with_cosine(const UnitEmbeddingMatrix& e,
                                std::span<const float> centroids, int threads) {
  const std::size_t n = e.rows();
  const std::size_t d = e.dim();
  const std::size_t k = centroids.size() / d;
  AssignOutput out{std::vector<std::uint32_t>(n), std::vector<double>(n)};
  const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::int64_t si = 0; si < sn; ++si) {
    const auto i = static_cast<std::size_t>(si);
    const float* x = e.row(i).data();
    double best = -std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double s = detail::dot(x, centroids.data() + c * d, d);
      if (s > best) {
        best = s;
        arg = static_cast<std::uint32_t>(c);
      }
    }
    out.cluster[i] = arg;
    out.cosine[i] = best;
  }
  return out;
}

// k-means++ with D^2 weights 1 - max cosine. Each draw is an exponential race
// keyed on (seed, id, round), so the chosen set does not depend on row order.
std::vector<float> seed_centroids(const UnitEmbeddingMatrix& e, std::uint32_t k,
                                  std::uint64_t seed, int threads) {
  const std::size_t n = e.rows();
  const std::size_t d = e.dim();
  std::vector<float> centroids(static_cast<std::size_t>(k) * d);
  std::vector<std::uint8_t> chosen(n, 0);
  std::vector<double> best_cos(n, -std::numeric_limits<double>::infinity());
  std::vector<double> race_key(n);

  auto pick_first = [&] {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const auto hi = mix_keys(seed, e.id(i), 0);
      const auto ha = mix_keys(seed, e.id(arg), 0);
      if (hi < ha || (hi == ha && e.id(i) < e.id(arg))) arg = i;
    }
    return arg;
  };

  std::size_t last = pick_first();
  chosen[last] = 1;
  copy_point_as_centroid(e, last, centroids.data());
  const auto sn = static_cast<std::int64_t>(n);

  for (std::uint32_t round = 1; round < k; ++round) {
    const float* newest = centroids.data() + static_cast<std::size_t>(round - 1) * d;
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::int64_t si = 0; si < sn; ++si) {
      const auto i = static_cast<std::size_t>(si);
      best_cos[i] = std::max(best_cos[i], detail::dot(e.row(i).data(), newest, d));
      if (chosen[i]) {
        race_key[i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double w = std::max(0.0, 1.0 - best_cos[i]);
      const double u = to_unit_open(mix_keys(seed, e.id(i), round));
      race_key[i] = w > 0.0 ? -std::log(u) / w
                            : std::numeric_limits<double>::infinity();
    }
    // Lowest key wins; all-infinite keys (every remaining point coincides with
    // a centroid) fall back to the lowest uniform draw. Ties go to lower id.
    std::size_t arg = n;
    double arg_key = 0.0;
    double arg_u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      const double u = to_unit_open(mix_keys(seed, e.id(i), round));
      const double key = race_key[i];
      bool better = false;
      if (arg == n) {
        better = true;
      } else if (key != arg_key) {
        better = key < arg_key;
      } else if (std::isinf(key) && u != arg_u) {
        better = u < arg_u;
      } else {
        better = e.id(i) < e.id(arg);
      }
      if (better) {
        arg = i;
        arg_key = key;
        arg_u = u;
      }
    }
    last = arg;
    chosen[last] = 1;
    copy_point_as_centroid(e, last,
                           centroids.data() + static_cast<std::size_t>(round) * d);
  }
  return centroids;
}

}  // namespace

KMeansModel::KMeansModel(std::size_t dim, std::vector<float> centroids,
                         std::vector<std::uint32_t> assignment,
                         std::vector<double> objective_trace)
    : dim_(dim),
      k_(0),
      centroids_(std::move(centroids)),
      assignment_(std::move(assignment)),
      objective_trace_(std::move(objective_trace)) {
  if (dim_ == 0 || centroids_.empty() || centroids_.size() % dim_ != 0) {
    throw InvalidArgument("centroid buffer does not hold whole d-vectors");
  }
  if (assignment_.empty()) throw InvalidArgument("model has no points");
  k_ = static_cast<std::uint32_t>(centroids_.size() / dim_);
  for (std::uint32_t c = 0; c < k_; ++c) {
    double sq = 0.0;
    for (float v : centroid(c)) {
      if (!std::isfinite(v)) {
        throw DataError("centroid " + std::to_string(c) + " is not finite");
      }
      sq += static_cast<double>(v) * v;
    }
    if (std::abs(std::sqrt(sq) - 1.0) > kCentroidNormTolerance) {
      throw DataError("centroid " + std::to_string(c) + " is not unit norm");
    }
  }
  offsets_.assign(static_cast<std::size_t>(k_) + 1, 0);
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] >= k_) {
      throw DataError("point " + std::to_string(i) + " assigned to cluster " +
                          std::to_string(assignment_[i]) + " but k=" +
                          std::to_string(k_),
                      i);
    }
    ++offsets_[assignment_[i] + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  members_.resize(assignment_.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    members_[cursor[assignment_[i]]++] = i;
  }
}

std::vector<std::uint32_t> assign(const UnitEmbeddingMatrix& e,
                                  std::span<const float> centroids,
                                  unsigned threads) {
  if (centroids.empty() || centroids.size() % e.dim() != 0) {
    throw InvalidArgument("centroid dimension does not match embeddings (d=" +
                          std::to_string(e.dim()) + ")");
  }
  return assign_with_cosine(e, centroids, detail::resolve_threads(threads))
      .cluster;
}

KMeansModel fit(const UnitEmbeddingMatrix& e, const KMeansOptions& options) {
  const std::size_t n = e.rows();
  const std::size_t d = e.dim();
  const std::uint32_t k = options.k;
  if (k == 0) throw InvalidArgument("k must be >= 1");
  if (k > n) {
    throw InvalidArgument("k=" + std::to_string(k) +
                          " exceeds the number of points n=" +
                          std::to_string(n));
  }
  if (options.iterations == 0) {
    throw InvalidArgument("iterations must be >= 1");
  }
  const int threads = detail::resolve_threads(options.threads);

  std::vector<std::size_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), std::size_t{0});
  std::sort(by_id.begin(), by_id.end(),
            [&](std::size_t a, std::size_t b) { return e.id(a) < e.id(b); });

  std::vector<float> centroids = seed_centroids(e, k, options.seed, threads);
  std::vector<std::uint32_t> previous(n, kUnassigned);
  std::vector<double> trace;
  AssignOutput current;

  for (std::uint32_t it = 0; it < options.iterations; ++it) {
    current = assign_with_cosine(e, centroids, threads);
    auto& cluster = current.cluster;
    auto& cosine = current.cosine;

    std::vector<std::size_t> counts(k, 0);
    for (auto c : cluster) ++counts[c];
    for (std::uint32_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[cluster[i]] < 2) continue;
        if (far == n || cosine[i] < cosine[far] ||
            (cosine[i] == cosine[far] && e.id(i) < e.id(far))) {
          far = i;
        }
      }
      --counts[cluster[far]];
      cluster[far] = c;
      counts[c] = 1;
      float* dst = centroids.data() + static_cast<std::size_t>(c) * d;
      copy_point_as_centroid(e, far, dst);
      cosine[far] = detail::dot(e.row(far).data(), dst, d);
    }

    double total = 0.0;
    for (double c : cosine) total += c;
    trace.push_back(total / static_cast<double>(n));

    const bool changed = cluster != previous;
    previous = cluster;
    if (!changed || it + 1 == options.iterations) break;

    // Per-cluster sums in id order so the result is independent of row order.
    std::vector<std::vector<std::size_t>> bucket(k);
    for (std::uint32_t c = 0; c < k; ++c) bucket[c].reserve(counts[c]);
    for (auto i : by_id) bucket[cluster[i]].push_back(i);
    const auto sk = static_cast<std::int64_t>(k);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 4)
    for (std::int64_t sc = 0; sc < sk; ++sc) {
      const auto c = static_cast<std::size_t>(sc);
      std::vector<double> sum(d, 0.0);
      for (auto i : bucket[c]) {
        const float* x = e.row(i).data();
        for (std::size_t j = 0; j < d; ++j) sum[j] += x[j];
      }
      store_normalized(sum, centroids.data() + c * d);
    }
  }

  return KMeansModel(d, std::move(centroids), std::move(current.cluster),
                     std::move(trace));
}

std::vector<std::uint32_t> nearest_clusters(const KMeansModel& model,
                                            std::uint32_t c, std::uint32_t m) {
  const std::uint32_t k = model.k();
  if (c >= k) {
    throw InvalidArgument("cluster " + std::to_string(c) +
                          " out of range for k=" + std::to_string(k));
  }
  if (m == 0 || m >= k) {
    throw InvalidArgument("neighbor count m=" + std::to_string(m) +
                          " must be in [1, k-1] with k=" + std::to_string(k));
  }
  std::vector<std::pair<double, std::uint32_t>> sims;
  sims.reserve(k - 1);
  const auto cc = model.centroid(c);
  for (std::uint32_t o = 0; o < k; ++o) {
    if (o == c) continue;
    sims.emplace_back(
        detail::dot(cc.data(), model.centroid(o).data(), model.dim()), o);
  }
  std::partial_sort(sims.begin(), sims.begin() + m, sims.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first
                                                : a.second < b.second;
                    });
  std::vector<std::uint32_t> out(m);
  for (std::uint32_t i = 0; i < m; ++i) out[i] = sims[i].second;
  return out;
}

std::vector<std::byte> encode_model(const KMeansModel& model) {
  detail::ByteWriter w;
  w.magic("SEMK");
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put<std::uint32_t>(model.k());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.dim()));
  w.put_array(model.centroids());
  w.put<std::uint64_t>(model.size());
  w.put_array(model.assignment());
  return std::move(w).take();
}

KMeansModel decode_model(std::span<const std::byte> bytes) {
  detail::ByteReader r(bytes, "SEMK1");
  r.expect_magic("SEMK");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw FormatError("SEMK1: unsupported version " + std::to_string(version));
  }
  const auto k = r.get<std::uint32_t>();
  const auto d = r.get<std::uint32_t>();
  if (k == 0 || d == 0) throw FormatError("SEMK1: empty model header");
  auto centroids = r.get_array<float>(static_cast<std::uint64_t>(k) * d);
  const auto n = r.get<std::uint64_t>();
  if (n == 0) throw FormatError("SEMK1: model has no points");
  auto assignment = r.get_array<std::uint32_t>(n);
  r.expect_end();
  return KMeansModel(d, std::move(centroids), std::move(assignment));
}

void save_model(const KMeansModel& model, const std::filesystem::path& path) {
  write_file_bytes(path, encode_model(model));
}

KMeansModel load_model(const std::filesystem::path& path) {
  return decode_model(read_file_bytes(path));
}

}  // namespace semdedup
