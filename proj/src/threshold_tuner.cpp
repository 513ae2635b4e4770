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

#include "semdedup/threshold_tuner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "semdedup/error.hpp"
#include "semdedup/rng.hpp"

namespace semdedup {

std::vector<std::uint32_t> sample_clusters(const KMeansModel& model,
                                           double fraction,
                                           std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("sample fraction must lie in (0, 1], got " +
                          std::to_string(fraction));
  }
  const std::uint32_t k = model.k();
  const double want = fraction * static_cast<double>(k);
  // Absorb representation error such as 0.3 * 10 = 3.0000000000000004.
  const auto count = static_cast<std::uint32_t>(
      std::min<double>(k, std::ceil(want * (1.0 - 1e-12))));
  if (count == 0 || want < 1.0 - 1e-12) {
    throw InvalidArgument("sample fraction " + std::to_string(fraction) +
                          " selects no cluster out of k=" + std::to_string(k));
  }
  std::vector<std::uint32_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto ha = mix_keys(seed, a);
    const auto hb = mix_keys(seed, b);
    return ha != hb ? ha < hb : a < b;
  });
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw InvalidArgument("epsilon must lie in (0, 1), got " +
                          std::to_string(eps));
  }
}

}  // namespace

SizeCurve size_curve(const UnitEmbeddingMatrix& e, const KMeansModel& model,
                     std::span<const std::uint32_t> sample,
                     KeepStrategy strategy, std::span<const double> epsilons,
                     std::uint64_t seed, std::size_t tile, unsigned threads) {
  if (sample.empty()) throw InvalidArgument("cluster sample is empty");
  if (epsilons.empty()) throw InvalidArgument("epsilon list is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    check_epsilon(epsilons[i]);
    if (i > 0 && !(epsilons[i] > epsilons[i - 1])) {
      throw InvalidArgument("epsilons must be strictly increasing");
    }
  }
  const auto profile =
      prefix_max_profile(e, model, strategy, seed, tile, threads, sample);
  SizeCurve curve;
  for (double eps : epsilons) {
    curve.points.push_back({eps, profile.kept_fraction_at(eps)});
  }
  return curve;
}

TuneResult tune_epsilon(const std::function<double(double)>& kept_fraction,
                        const TuneOptions& o) {
  check_epsilon(o.eps_lo);
  check_epsilon(o.eps_hi);
  if (!(o.eps_lo < o.eps_hi)) {
    throw InvalidArgument("eps_lo must be < eps_hi");
  }
  if (!(o.target_fraction > 0.0 && o.target_fraction < 1.0)) {
    throw InvalidArgument("target fraction must lie in (0, 1)");
  }
  if (!(o.tol_fraction > 0.0)) throw InvalidArgument("tol_fraction must be > 0");
  if (o.max_probes < 2) throw InvalidArgument("max_probes must be >= 2");

  TuneResult r;
  auto probe = [&](double eps) {
    const CurvePoint p{eps, kept_fraction(eps)};
    r.probes.push_back(p);
    ++r.probes_used;
    return p;
  };
  auto within = [&](const CurvePoint& p) {
    return std::abs(p.kept_fraction - o.target_fraction) <= o.tol_fraction;
  };
  auto finish = [&](const CurvePoint& p, bool converged) {
    r.epsilon = p.epsilon;
    r.achieved_fraction = p.kept_fraction;
    r.converged = converged;
    return r;
  };

  Bracket b;
  b.lo = probe(o.eps_lo);
  if (within(b.lo)) return finish(b.lo, true);
  if (b.lo.kept_fraction < o.target_fraction) {
    throw BracketError("kept fraction " + std::to_string(b.lo.kept_fraction) +
                       " at eps_lo=" + std::to_string(o.eps_lo) +
                       " is already below the target " +
                       std::to_string(o.target_fraction));
  }
  b.hi = probe(o.eps_hi);
  if (within(b.hi)) return finish(b.hi, true);
  if (b.hi.kept_fraction > o.target_fraction) {
    throw BracketError("kept fraction " + std::to_string(b.hi.kept_fraction) +
                       " at eps_hi=" + std::to_string(o.eps_hi) +
                       " is still above the target " +
                       std::to_string(o.target_fraction));
  }
  r.brackets.push_back(b);

  // Regula falsi. When the same end survives twice in a row the next probe
  // is the bracket midpoint, which stops a flat step from pinning one end.
  int same_side = 0;
  int last_side = 0;
  while (r.probes_used < o.max_probes) {
    double eps;
    if (same_side >= 2) {
      eps = 0.5 * (b.lo.epsilon + b.hi.epsilon);
      same_side = 0;
    } else {
      const double slope = (b.lo.kept_fraction - b.hi.kept_fraction) /
                           (b.hi.epsilon - b.lo.epsilon);
      eps = b.lo.epsilon + (b.lo.kept_fraction - o.target_fraction) / slope;
    }
    eps = std::clamp(eps, b.lo.epsilon, b.hi.epsilon);
    if (eps == b.lo.epsilon || eps == b.hi.epsilon) {
      eps = 0.5 * (b.lo.epsilon + b.hi.epsilon);
    }
    const CurvePoint p = probe(eps);
    if (within(p)) {
      r.brackets.push_back(b);
      return finish(p, true);
    }
    const int side = p.kept_fraction > o.target_fraction ? -1 : 1;
    if (side < 0) {
      b.lo = p;
    } else {
      b.hi = p;
    }
    same_side = side == last_side ? same_side + 1 : 1;
    last_side = side;
    r.brackets.push_back(b);
  }

  const auto best = std::min_element(
      r.probes.begin(), r.probes.end(), [&](const auto& a, const auto& c) {
        return std::abs(a.kept_fraction - o.target_fraction) <
               std::abs(c.kept_fraction - o.target_fraction);
      });
  return finish(*best, false);
}

TuneResult tune_epsilon(const UnitEmbeddingMatrix& e, const KMeansModel& model,
                        std::span<const std::uint32_t> sample,
                        const TuneOptions& options) {
  if (sample.empty()) throw InvalidArgument("cluster sample is empty");
  const auto profile =
      prefix_max_profile(e, model, options.strategy, options.seed,
                         options.tile, options.threads, sample);
  return tune_epsilon(
      [&](double eps) { return profile.kept_fraction_at(eps); }, options);
}

}  // namespace semdedup
