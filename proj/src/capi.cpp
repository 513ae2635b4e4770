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

#include "semdedup/semdedup.h"

#include <algorithm>
#include <new>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "semdedup/analysis_metrics.hpp"
#include "semdedup/dedup_core.hpp"
#include "semdedup/embedding_store.hpp"
#include "semdedup/error.hpp"
#include "semdedup/oracle.hpp"
#include "semdedup/spherical_kmeans.hpp"
#include "semdedup/threshold_tuner.hpp"

using namespace semdedup;

struct semd_matrix {
  std::variant<EmbeddingMatrix, UnitEmbeddingMatrix> value;

  const EmbeddingMatrix& raw() const {
    if (const auto* u = std::get_if<UnitEmbeddingMatrix>(&value)) {
      return u->matrix();
    }
    return std::get<EmbeddingMatrix>(value);
  }
};

struct semd_model {
  KMeansModel value;
};

struct semd_result {
  DedupResult value;
};

namespace {

thread_local std::string g_last_error;
thread_local std::int64_t g_last_error_row = -1;

semd_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return SEMD_ERR_INVALID_ARGUMENT;
    case ErrorKind::kFormat: return SEMD_ERR_FORMAT;
    case ErrorKind::kData: return SEMD_ERR_DATA;
    case ErrorKind::kDegenerateRow: return SEMD_ERR_DEGENERATE_ROW;
    case ErrorKind::kBracket: return SEMD_ERR_BRACKET;
    case ErrorKind::kConstruction: return SEMD_ERR_CONSTRUCTION;
    case ErrorKind::kIo: return SEMD_ERR_IO;
  }
  return SEMD_ERR_INTERNAL;
}

semd_status fail(semd_status s, std::string message, std::int64_t row = -1) {
  g_last_error = std::move(message);
  g_last_error_row = row;
  return s;
}

template <typename F>
semd_status guarded(F&& body) noexcept {
  try {
    body();
    return SEMD_OK;
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.what(),
                e.row() ? static_cast<std::int64_t>(*e.row()) : -1);
  } catch (const std::bad_alloc&) {
    return fail(SEMD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SEMD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SEMD_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

const UnitEmbeddingMatrix& unit_of(const semd_matrix* m) {
  require(m != nullptr, "matrix handle is null");
  const auto* u = std::get_if<UnitEmbeddingMatrix>(&m->value);
  if (u == nullptr) {
    throw InvalidArgument(
        "matrix is not unit-normalized; call semd_matrix_normalize first");
  }
  return *u;
}

const KMeansModel& model_of(const semd_model* m) {
  require(m != nullptr, "model handle is null");
  return m->value;
}

KeepStrategy strategy_of(semd_strategy s) {
  switch (s) {
    case SEMD_KEEP_LOW_CENTROID_SIM: return KeepStrategy::kLowCentroidSim;
    case SEMD_KEEP_HIGH_CENTROID_SIM: return KeepStrategy::kHighCentroidSim;
    case SEMD_KEEP_RANDOM: return KeepStrategy::kRandom;
  }
  throw InvalidArgument("unknown keep strategy code");
}

DedupConfig config_of(const semd_dedup_params* p) {
  require(p != nullptr, "dedup params are null");
  DedupConfig cfg;
  cfg.epsilon = p->epsilon;
  cfg.strategy = strategy_of(p->strategy);
  cfg.seed = p->seed;
  cfg.tile = p->tile;
  cfg.threads = p->threads;
  return cfg;
}

}  // namespace

extern "C" {

const char* semd_version(void) { return "1.0.0"; }

const char* semd_status_name(semd_status status) {
  switch (status) {
    case SEMD_OK: return "ok";
    case SEMD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SEMD_ERR_FORMAT: return "format error";
    case SEMD_ERR_DATA: return "data error";
    case SEMD_ERR_DEGENERATE_ROW: return "degenerate row";
    case SEMD_ERR_BRACKET: return "bracket error";
    case SEMD_ERR_CONSTRUCTION: return "construction error";
    case SEMD_ERR_IO: return "i/o error";
    case SEMD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* semd_last_error(void) { return g_last_error.c_str(); }
int64_t semd_last_error_row(void) { return g_last_error_row; }

semd_status semd_matrix_load(const char* path, semd_format format,
                             semd_matrix** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    const auto fmt = format == SEMD_FORMAT_TEXT ? EmbeddingFormat::kText
                                                : EmbeddingFormat::kBinary;
    *out = new semd_matrix{load_embeddings(path, fmt)};
  });
}

semd_status semd_matrix_create(const float* data, uint64_t n, uint32_t d,
                               const uint64_t* ids, semd_matrix** out) {
  return guarded([&] {
    require(data != nullptr && out != nullptr, "null argument");
    require(n > 0 && d > 0, "matrix must have n >= 1 and d >= 1");
    std::vector<float> values(data, data + n * d);
    std::vector<std::uint64_t> id_list;
    if (ids != nullptr) id_list.assign(ids, ids + n);
    *out = new semd_matrix{EmbeddingMatrix(d, std::move(values),
                                           std::move(id_list))};
  });
}

semd_status semd_matrix_save(const semd_matrix* m, const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "null argument");
    save_embeddings(m->raw(), path);
  });
}

semd_status semd_matrix_normalize(const semd_matrix* m, semd_matrix** out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    *out = new semd_matrix{normalize_rows(m->raw())};
  });
}

int semd_matrix_is_unit(const semd_matrix* m) {
  return m != nullptr && std::holds_alternative<UnitEmbeddingMatrix>(m->value);
}

uint64_t semd_matrix_rows(const semd_matrix* m) { return m->raw().rows(); }
uint32_t semd_matrix_dim(const semd_matrix* m) {
  return static_cast<uint32_t>(m->raw().dim());
}
const float* semd_matrix_data(const semd_matrix* m) {
  return m->raw().data().data();
}
const uint64_t* semd_matrix_ids(const semd_matrix* m) {
  return m->raw().ids().data();
}

semd_status semd_matrix_write_subset(const semd_matrix* m,
                                     const uint64_t* keep_ids, size_t count,
                                     const char* path, uint64_t* written) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "null argument");
    require(keep_ids != nullptr || count == 0, "null id list");
    const auto n = write_subset(
        m->raw(), std::span<const std::uint64_t>(keep_ids, count), path);
    if (written != nullptr) *written = n;
  });
}

void semd_matrix_free(semd_matrix* m) { delete m; }

semd_kmeans_params semd_kmeans_params_default(void) {
  return semd_kmeans_params{1024, 100, 0, 0};
}

semd_status semd_kmeans_fit(const semd_matrix* unit,
                            const semd_kmeans_params* params,
                            semd_model** out) {
  return guarded([&] {
    require(params != nullptr && out != nullptr, "null argument");
    KMeansOptions o;
    o.k = params->k;
    o.iterations = params->iterations;
    o.seed = params->seed;
    o.threads = params->threads;
    *out = new semd_model{fit(unit_of(unit), o)};
  });
}

semd_status semd_assign(const semd_matrix* unit, const float* centroids,
                        uint32_t k, uint32_t threads,
                        uint32_t* out_assignment) {
  return guarded([&] {
    require(centroids != nullptr && out_assignment != nullptr, "null argument");
    require(k > 0, "k must be >= 1");
    const auto& e = unit_of(unit);
    const auto a = assign(
        e, std::span<const float>(centroids, std::size_t{k} * e.dim()),
        threads);
    std::copy(a.begin(), a.end(), out_assignment);
  });
}

semd_status semd_model_load(const char* path, semd_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new semd_model{load_model(path)};
  });
}

semd_status semd_model_save(const semd_model* model, const char* path) {
  return guarded([&] {
    require(path != nullptr, "null argument");
    save_model(model_of(model), path);
  });
}

uint32_t semd_model_k(const semd_model* model) { return model->value.k(); }
uint32_t semd_model_dim(const semd_model* model) {
  return static_cast<uint32_t>(model->value.dim());
}
uint64_t semd_model_size(const semd_model* model) {
  return model->value.size();
}
const float* semd_model_centroids(const semd_model* model) {
  return model->value.centroids().data();
}
const uint32_t* semd_model_assignment(const semd_model* model) {
  return model->value.assignment().data();
}
uint64_t semd_model_cluster_size(const semd_model* model, uint32_t c) {
  return c < model->value.k() ? model->value.members(c).size() : 0;
}

void semd_model_objective_trace(const semd_model* model, const double** values,
                                size_t* count) {
  const auto trace = model->value.objective_trace();
  if (values != nullptr) *values = trace.data();
  if (count != nullptr) *count = trace.size();
}

semd_status semd_model_nearest_clusters(const semd_model* model, uint32_t c,
                                        uint32_t m, uint32_t* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const auto list = nearest_clusters(model_of(model), c, m);
    std::copy(list.begin(), list.end(), out);
  });
}

void semd_model_free(semd_model* model) { delete model; }

semd_dedup_params semd_dedup_params_default(void) {
  return semd_dedup_params{0.05, SEMD_KEEP_LOW_CENTROID_SIM, 0, 1024, 0};
}

semd_status semd_dedup_run(const semd_matrix* unit, const semd_model* model,
                           const semd_dedup_params* params, semd_result** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new semd_result{
        dedup_dataset(unit_of(unit), model_of(model), config_of(params))};
  });
}

uint64_t semd_result_size(const semd_result* r) { return r->value.keep.size(); }
uint64_t semd_result_kept(const semd_result* r) { return r->value.kept; }
double semd_result_kept_fraction(const semd_result* r) {
  return r->value.kept_fraction;
}
uint64_t semd_result_comparisons(const semd_result* r) {
  return r->value.comparisons;
}
const uint8_t* semd_result_keep_mask(const semd_result* r) {
  return r->value.keep.data();
}
const uint64_t* semd_result_cluster_removed(const semd_result* r, uint32_t* k) {
  if (k != nullptr) {
    *k = static_cast<uint32_t>(r->value.per_cluster_removed.size());
  }
  return r->value.per_cluster_removed.data();
}

semd_status semd_result_cluster_stats(const semd_result* r,
                                      const semd_model* model, uint64_t* sizes,
                                      uint64_t* removed,
                                      double* removed_fraction) {
  return guarded([&] {
    require(r != nullptr, "result handle is null");
    const auto stats = per_cluster_stats(r->value, model_of(model));
    for (std::size_t c = 0; c < stats.size(); ++c) {
      if (sizes != nullptr) sizes[c] = stats[c].size;
      if (removed != nullptr) removed[c] = stats[c].removed;
      if (removed_fraction != nullptr) {
        removed_fraction[c] = stats[c].removed_fraction;
      }
    }
  });
}

void semd_result_free(semd_result* r) { delete r; }

semd_status semd_sweep(const semd_matrix* unit, const semd_model* model,
                       const semd_dedup_params* params,
                       const double* epsilons, size_t count,
                       double* out_fractions) {
  return guarded([&] {
    require(count == 0 || (epsilons != nullptr && out_fractions != nullptr),
            "null argument");
    if (count == 0) throw InvalidArgument("epsilon list is empty");
    auto cfg = config_of(params);
    for (std::size_t i = 0; i < count; ++i) {
      cfg.epsilon = epsilons[i];
      cfg.validate();
      if (i > 0 && !(epsilons[i] > epsilons[i - 1])) {
        throw InvalidArgument("epsilons must be strictly increasing");
      }
    }
    const auto profile = prefix_max_profile(unit_of(unit), model_of(model),
                                            cfg.strategy, cfg.seed, cfg.tile,
                                            cfg.threads);
    for (std::size_t i = 0; i < count; ++i) {
      out_fractions[i] = profile.kept_fraction_at(epsilons[i]);
    }
  });
}

semd_status semd_sample_clusters(const semd_model* model, double fraction,
                                 uint64_t seed, uint32_t* out, size_t capacity,
                                 size_t* count) {
  return guarded([&] {
    require(count != nullptr, "null argument");
    const auto s = sample_clusters(model_of(model), fraction, seed);
    *count = s.size();
    if (out != nullptr && capacity >= s.size()) {
      std::copy(s.begin(), s.end(), out);
    } else if (out != nullptr) {
      throw InvalidArgument("sample buffer too small: need " +
                            std::to_string(s.size()));
    }
  });
}

semd_status semd_size_curve(const semd_matrix* unit, const semd_model* model,
                            const uint32_t* sample, size_t sample_count,
                            const semd_dedup_params* params,
                            const double* epsilons, size_t count,
                            double* out_fractions) {
  return guarded([&] {
    require(out_fractions != nullptr || count == 0, "null argument");
    const auto cfg = config_of(params);
    const auto curve = size_curve(
        unit_of(unit), model_of(model),
        std::span<const std::uint32_t>(sample, sample_count), cfg.strategy,
        std::span<const double>(epsilons, count), cfg.seed, cfg.tile,
        cfg.threads);
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      out_fractions[i] = curve.points[i].kept_fraction;
    }
  });
}

semd_tune_params semd_tune_params_default(void) {
  return semd_tune_params{0.5,  0.01, 0.5, 0.02, 8,
                          SEMD_KEEP_LOW_CENTROID_SIM, 0, 1024, 0};
}

semd_status semd_tune(const semd_matrix* unit, const semd_model* model,
                      const uint32_t* sample, size_t sample_count,
                      const semd_tune_params* params,
                      semd_tune_outcome* outcome, double* probe_eps,
                      double* probe_fraction) {
  return guarded([&] {
    require(params != nullptr && outcome != nullptr, "null argument");
    TuneOptions o;
    o.target_fraction = params->target_fraction;
    o.eps_lo = params->eps_lo;
    o.eps_hi = params->eps_hi;
    o.tol_fraction = params->tol_fraction;
    o.max_probes = params->max_probes;
    o.strategy = strategy_of(params->strategy);
    o.seed = params->seed;
    o.tile = params->tile;
    o.threads = params->threads;
    const auto r =
        tune_epsilon(unit_of(unit), model_of(model),
                     std::span<const std::uint32_t>(sample, sample_count), o);
    outcome->epsilon = r.epsilon;
    outcome->achieved_fraction = r.achieved_fraction;
    outcome->probes_used = r.probes_used;
    outcome->converged = r.converged ? 1 : 0;
    for (std::size_t i = 0; i < r.probes.size(); ++i) {
      if (probe_eps != nullptr) probe_eps[i] = r.probes[i].epsilon;
      if (probe_fraction != nullptr) {
        probe_fraction[i] = r.probes[i].kept_fraction;
      }
    }
  });
}

semd_status semd_similarity_histogram(const semd_matrix* unit,
                                      const semd_model* model, size_t bins,
                                      uint32_t threads, uint64_t* counts) {
  return guarded([&] {
    require(counts != nullptr, "null argument");
    const auto h =
        similarity_histogram(unit_of(unit), model_of(model), bins, threads);
    std::copy(h.counts.begin(), h.counts.end(), counts);
  });
}

semd_status semd_duplicate_incidence(const semd_matrix* unit,
                                     const semd_model* model, double epsilon,
                                     uint32_t threads, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = duplicate_incidence(unit_of(unit), model_of(model), epsilon,
                               threads);
  });
}

semd_status semd_intersection_pct(const uint64_t* keep_a, size_t na,
                                  const uint64_t* keep_b, size_t nb,
                                  double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require((keep_a != nullptr || na == 0) && (keep_b != nullptr || nb == 0),
            "null id list");
    *out = intersection_pct(std::span<const std::uint64_t>(keep_a, na),
                            std::span<const std::uint64_t>(keep_b, nb), na);
  });
}

semd_status semd_dedup_efficiency(const semd_matrix* unit,
                                  const semd_model* model, double epsilon,
                                  uint32_t neighbors, uint32_t threads,
                                  semd_efficiency* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const auto r = dedup_efficiency(unit_of(unit), model_of(model), epsilon,
                                    neighbors, threads);
    *out = semd_efficiency{r.eta, r.within_pairs, r.candidate_pairs,
                           r.neighbors};
  });
}

semd_planted_params semd_planted_params_default(void) {
  return semd_planted_params{100, 5, 64, 0.999, 0, 0.45};
}

semd_status semd_generate_planted(const semd_planted_params* params,
                                  semd_matrix** out, uint64_t* group_of,
                                  double* within_sim, double* across_sim) {
  return guarded([&] {
    require(params != nullptr && out != nullptr, "null argument");
    oracle::PlantedOptions o;
    o.n_groups = params->n_groups;
    o.group_size = params->group_size;
    o.dim = params->dim;
    o.within_sim_target = params->within_sim_target;
    o.seed = params->seed;
    o.max_center_cosine = params->max_center_cosine;
    auto corpus = oracle::generate_planted(o);
    if (group_of != nullptr) {
      for (std::size_t g = 0; g < corpus.groups.size(); ++g) {
        for (auto id : corpus.groups[g]) group_of[id] = g;
      }
    }
    if (within_sim != nullptr) *within_sim = corpus.within_sim;
    if (across_sim != nullptr) *across_sim = corpus.across_sim;
    *out = new semd_matrix{std::move(corpus.embeddings)};
  });
}

}  // extern "C"
