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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <vector>

#include "semdedup/error.hpp"
#include "semdedup/oracle.hpp"
#include "semdedup/rng.hpp"
#include "semdedup/spherical_kmeans.hpp"
#include "test_util.hpp"

namespace semdedup {
namespace {

using testing::random_corpus;
using testing::unit_rows;

constexpr double kPi = 3.14159265358979323846;

double norm(std::span<const float> v) {
  double s = 0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

void expect_model_invariants(const KMeansModel& m) {
  for (std::uint32_t c = 0; c < m.k(); ++c) {
    EXPECT_NEAR(norm(m.centroid(c)), 1.0, 1e-6);
  }
  std::vector<int> seen(m.size(), 0);
  for (std::uint32_t c = 0; c < m.k(); ++c) {
    const auto mem = m.members(c);
    EXPECT_TRUE(std::is_sorted(mem.begin(), mem.end()));
    for (std::size_t i : mem) {
      ASSERT_LT(i, m.size());
      ++seen[i];
      EXPECT_EQ(m.assignment()[i], c);
    }
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  const auto trace = m.objective_trace();
  for (std::size_t t = 1; t < trace.size(); ++t) {
    EXPECT_GE(trace[t], trace[t - 1] - 1e-7) << "iteration " << t;
  }
}

TEST(KMeans, SinglePoint) {
  const auto e = unit_rows(3, {0, 0.6f, 0.8f});
  for (std::uint32_t it : {1u, 5u, 100u}) {
    const auto m = fit(e, {.k = 1, .iterations = it, .seed = 3});
    EXPECT_EQ(m.assignment()[0], 0u);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(m.centroid(0)[j], e.row(0)[j], 1e-7);
    }
  }
}

TEST(KMeans, TwoTightGroupsSeparate) {
  Xoshiro256StarStar rng(5);
  const std::size_t d = 16;
  std::vector<float> data;
  std::vector<int> truth;
  const double spread = std::tan(kPi / 180.0) / std::sqrt(d) * 0.5;
  for (int i = 0; i < 100; ++i) {
    const int g = static_cast<int>(rng() % 2);
    truth.push_back(g);
    for (std::size_t j = 0; j < d; ++j) {
      const double base = (static_cast<int>(j) == g) ? 1.0 : 0.0;
      data.push_back(static_cast<float>(base + spread * rng.normal()));
    }
  }
  const auto e = unit_rows(d, data);
  for (std::size_t i = 0; i < e.rows(); ++i) {
    EXPECT_GT(e.row(i)[truth[i]], std::cos(kPi / 180.0));
  }
  const auto m = fit(e, {.k = 2, .iterations = 50, .seed = 1});
  expect_model_invariants(m);
  for (std::size_t i = 0; i < e.rows(); ++i) {
    for (std::size_t j = 0; j < e.rows(); ++j) {
      EXPECT_EQ(truth[i] == truth[j], m.assignment()[i] == m.assignment()[j]);
    }
  }
  EXPECT_EQ(oracle::brute_force_assign(e, m.centroids()),
            std::vector<std::uint32_t>(m.assignment().begin(),
                                       m.assignment().end()));
}

TEST(KMeans, KEqualsNIsSaturated) {
  const auto e = random_corpus(40, 8, 2);
  const auto m = fit(e, {.k = 40, .iterations = 10, .seed = 9});
  expect_model_invariants(m);
  for (std::uint32_t c = 0; c < m.k(); ++c) EXPECT_EQ(m.members(c).size(), 1u);
  ASSERT_FALSE(m.objective_trace().empty());
  EXPECT_NEAR(m.objective_trace().back(), 1.0, 1e-6);
}

TEST(KMeans, KValidation) {
  const auto e = random_corpus(5, 4, 1);
  EXPECT_THROW(fit(e, {.k = 0}), InvalidArgument);
  EXPECT_THROW(fit(e, {.k = 6}), InvalidArgument);
  EXPECT_THROW(fit(e, {.k = 2, .iterations = 0}), InvalidArgument);
}

TEST(KMeans, InvariantsOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto e = random_corpus(150 + seed * 7, 4 + seed % 9, seed, 0.3);
    const auto m = fit(e, {.k = static_cast<std::uint32_t>(2 + seed % 12),
                           .iterations = 30,
                           .seed = seed});
    expect_model_invariants(m);
    EXPECT_EQ(oracle::brute_force_assign(e, m.centroids()),
              std::vector<std::uint32_t>(m.assignment().begin(),
                                         m.assignment().end()));
  }
}

TEST(KMeans, DuplicatePointsStillFillEveryCluster) {
  // Only three distinct directions but k=6; repair has to populate the
  // clusters that seeding leaves without a distinct point.
  std::vector<float> data;
  for (int i = 0; i < 12; ++i) {
    const int axis = i % 3;
    for (int j = 0; j < 3; ++j) data.push_back(j == axis ? 1.0f : 0.0f);
  }
  const auto e = unit_rows(3, data);
  const auto m = fit(e, {.k = 6, .iterations = 20, .seed = 4});
  expect_model_invariants(m);
  for (std::uint32_t c = 0; c < m.k(); ++c) {
    EXPECT_FALSE(m.members(c).empty()) << "cluster " << c;
  }
}

TEST(KMeans, DeterministicAcrossRunsAndThreads) {
  const auto e = random_corpus(600, 24, 77, 0.2);
  const KMeansOptions base{.k = 17, .iterations = 25, .seed = 123};
  auto one = base;
  one.threads = 1;
  auto many = base;
  many.threads = 8;
  const auto a = encode_model(fit(e, one));
  const auto b = encode_model(fit(e, many));
  const auto c = encode_model(fit(e, one));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  auto other = base;
  other.seed = 124;
  EXPECT_NE(encode_model(fit(e, other)), a);
}

TEST(KMeans, RowPermutationGivesSameClusteringPerId) {
  const auto e = random_corpus(300, 12, 31, 0.25);
  std::vector<std::size_t> perm(e.rows());
  std::iota(perm.begin(), perm.end(), 0);
  Xoshiro256StarStar rng(8);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[rng() % i]);
  }
  std::vector<float> data;
  std::vector<std::uint64_t> ids;
  for (std::size_t p : perm) {
    data.insert(data.end(), e.row(p).begin(), e.row(p).end());
    ids.push_back(e.id(p));
  }
  const auto shuffled = UnitEmbeddingMatrix::from_unit_rows(
      EmbeddingMatrix(e.dim(), data, ids));
  const KMeansOptions opt{.k = 9, .iterations = 40, .seed = 5};
  const auto a = fit(e, opt);
  const auto b = fit(shuffled, opt);
  EXPECT_TRUE(std::equal(a.centroids().begin(), a.centroids().end(),
                         b.centroids().begin(), b.centroids().end()));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    EXPECT_EQ(b.assignment()[i], a.assignment()[perm[i]]);
  }
}

TEST(Assign, ExactMatchAndTies) {
  const auto e = unit_rows(2, {0, 1, 1, 1});
  const std::vector<float> centroids = {-1, 0, 1, 0, 0, 1, 0, -1};
  const auto a = assign(e, centroids);
  EXPECT_EQ(a[0], 2u);
  EXPECT_EQ(a[1], 1u);
}

TEST(Assign, MatchesBruteForceOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto e = random_corpus(100, 16, seed);
    const auto c = random_corpus(7, 16, seed + 1000);
    EXPECT_EQ(assign(e, c.matrix().data()),
              oracle::brute_force_assign(e, c.matrix().data()));
  }
}

TEST(Assign, DimensionMismatch) {
  const auto e = unit_rows(2, {0, 1});
  const std::vector<float> bad = {1, 0, 0};
  EXPECT_THROW(assign(e, bad), InvalidArgument);
}

KMeansModel model_at_angles(const std::vector<double>& degrees) {
  std::vector<float> c;
  for (double a : degrees) {
    c.push_back(static_cast<float>(std::cos(a * kPi / 180)));
    c.push_back(static_cast<float>(std::sin(a * kPi / 180)));
  }
  return KMeansModel(2, c, {0});
}

TEST(NearestClusters, OnlyChoice) {
  const auto m = model_at_angles({0, 90});
  EXPECT_EQ(nearest_clusters(m, 0, 1), std::vector<std::uint32_t>{1});
}

TEST(NearestClusters, MatchesSortedCosines) {
  const std::vector<double> angles = {0, 100, 30, 200, 45, -30};
  const auto m = model_at_angles(angles);
  for (std::uint32_t c = 0; c < angles.size(); ++c) {
    std::vector<std::pair<double, std::uint32_t>> sims;
    for (std::uint32_t o = 0; o < angles.size(); ++o) {
      if (o == c) continue;
      sims.emplace_back(-oracle::naive_cosine(m.centroid(c), m.centroid(o)), o);
    }
    std::sort(sims.begin(), sims.end());
    std::vector<std::uint32_t> expect;
    for (auto& [s, o] : sims) expect.push_back(o);
    EXPECT_EQ(nearest_clusters(m, c, 5), expect) << "cluster " << c;
    expect.resize(2);
    EXPECT_EQ(nearest_clusters(m, c, 2), expect);
  }
}

TEST(NearestClusters, TiesByLowestIndex) {
  const auto m = model_at_angles({0, 90, -90});
  EXPECT_EQ(nearest_clusters(m, 0, 2), (std::vector<std::uint32_t>{1, 2}));
}

TEST(NearestClusters, Validation) {
  const auto m = model_at_angles({0, 90, 180});
  EXPECT_THROW(nearest_clusters(m, 0, 3), InvalidArgument);
  EXPECT_THROW(nearest_clusters(m, 0, 0), InvalidArgument);
}

TEST(KMeansModelType, RejectsBadInputs) {
  EXPECT_THROW(KMeansModel(2, {1, 1}, {0}), DataError);
  EXPECT_THROW(KMeansModel(2, {1, 0}, {1}), DataError);
}

TEST(ModelFormat, RoundTrip) {
  const auto e = random_corpus(80, 6, 3);
  const auto m = fit(e, {.k = 5, .iterations = 10, .seed = 2});
  const auto bytes = encode_model(m);
  EXPECT_EQ(bytes.size(), 4 + 4 + 4 + 4 + 5 * 6 * 4 + 8 + 80 * 4u);
  const auto back = decode_model(bytes);
  EXPECT_EQ(back.k(), m.k());
  EXPECT_TRUE(std::equal(back.centroids().begin(), back.centroids().end(),
                         m.centroids().begin(), m.centroids().end()));
  EXPECT_TRUE(std::equal(back.assignment().begin(), back.assignment().end(),
                         m.assignment().begin(), m.assignment().end()));
  EXPECT_EQ(encode_model(back), bytes);

  testing::TempDir dir("model_rt");
  save_model(m, dir / "m.semk");
  EXPECT_EQ(encode_model(load_model(dir / "m.semk")), bytes);
}

TEST(ModelFormat, CorruptionIsRejected) {
  const auto e = random_corpus(10, 4, 3);
  const auto good = encode_model(fit(e, {.k = 3, .iterations = 5}));
  EXPECT_EQ(std::memcmp(good.data(), "SEMK", 4), 0);
  for (std::size_t len = 0; len < good.size(); ++len) {
    EXPECT_THROW(decode_model(std::span(good.data(), len)), FormatError);
  }
  for (std::size_t pos = 0; pos < 4; ++pos) {
    auto bad = good;
    bad[pos] ^= std::byte{0x20};
    EXPECT_THROW(decode_model(bad), FormatError);
  }
  auto version = good;
  version[4] = std::byte{9};
  EXPECT_THROW(decode_model(version), FormatError);
  auto extra = good;
  extra.push_back(std::byte{1});
  EXPECT_THROW(decode_model(extra), FormatError);
  auto bad_assign = good;
  bad_assign[good.size() - 4] = std::byte{3};
  EXPECT_THROW(decode_model(bad_assign), Error);
}

}  // namespace
}  // namespace semdedup
