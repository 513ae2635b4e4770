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
#include <functional>
#include <span>
#include <vector>

#include "semdedup/dedup_core.hpp"

namespace semdedup {

struct CurvePoint {
  double epsilon;
  double kept_fraction;
};

// Kept fraction as a function of epsilon; epsilon strictly increasing and
// kept fraction non-increasing.
struct SizeCurve {
  std::vector<CurvePoint> points;
};

// ceil(fraction * k) distinct clusters, uniform without replacement, sorted
// ascending. fraction must lie in (0, 1] with fraction * k >= 1.
std::vector<std::uint32_t> sample_clusters(const KMeansModel& model,
                                           double fraction, std::uint64_t seed);

SizeCurve size_curve(const UnitEmbeddingMatrix& e, const KMeansModel& model,
                     std::span<const std::uint32_t> sample,
                     KeepStrategy strategy, std::span<const double> epsilons,
                     std::uint64_t seed = 0, std::size_t tile = 1024,
                     unsigned threads = 0);

struct TuneOptions {
  double target_fraction = 0.5;
  double eps_lo = 0.01;
  double eps_hi = 0.5;
  double tol_fraction = 0.02;
  unsigned max_probes = 8;
  KeepStrategy strategy = KeepStrategy::kLowCentroidSim;
  std::uint64_t seed = 0;
  std::size_t tile = 1024;
  unsigned threads = 0;
};

struct Bracket {
  CurvePoint lo;  // kept_fraction >= target
  CurvePoint hi;  // kept_fraction <= target
};

struct TuneResult {
  double epsilon = 0.0;
  double achieved_fraction = 0.0;
  unsigned probes_used = 0;
  bool converged = false;
  std::vector<CurvePoint> probes;  // in evaluation order
  std::vector<Bracket> brackets;   // bracket retained after each probe >= 2
};

// Bounded secant search for the epsilon whose kept fraction is within
// tol_fraction of the target. `kept_fraction` must be non-increasing in
// epsilon. Throws BracketError when (eps_lo, eps_hi) does not bracket the
// target. On exhaustion returns the best probe with converged = false.
TuneResult tune_epsilon(const std::function<double(double)>& kept_fraction,
                        const TuneOptions& options);

// Same search, with each probe evaluated by deduplicating only `sample`.
TuneResult tune_epsilon(const UnitEmbeddingMatrix& e, const KMeansModel& model,
                        std::span<const std::uint32_t> sample,
                        const TuneOptions& options);

}  // namespace semdedup
