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

/* C interface to the semantic deduplication engine.
 *
 * Objects are opaque handles created by semd_*_load / _create / _fit / _run
 * and released with the matching semd_*_free. Every fallible call returns a
 * semd_status; on failure semd_last_error() describes the problem (the
 * message is thread-local and valid until the next failing call on the same
 * thread). Pointers returned by accessors borrow from their handle.
 */
#ifndef SEMDEDUP_SEMDEDUP_H_
#define SEMDEDUP_SEMDEDUP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SEMD_API __declspec(dllexport)
#else
#define SEMD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum semd_status {
  SEMD_OK = 0,
  SEMD_ERR_INVALID_ARGUMENT = 1,
  SEMD_ERR_FORMAT = 2,
  SEMD_ERR_DATA = 3,
  SEMD_ERR_DEGENERATE_ROW = 4,
  SEMD_ERR_BRACKET = 5,
  SEMD_ERR_CONSTRUCTION = 6,
  SEMD_ERR_IO = 7,
  SEMD_ERR_INTERNAL = 8
} semd_status;

typedef enum semd_format {
  SEMD_FORMAT_BINARY = 0, /* SEMD1 */
  SEMD_FORMAT_TEXT = 1    /* one whitespace-separated row per line */
} semd_format;

typedef enum semd_strategy {
  SEMD_KEEP_LOW_CENTROID_SIM = 0,
  SEMD_KEEP_HIGH_CENTROID_SIM = 1,
  SEMD_KEEP_RANDOM = 2
} semd_strategy;

typedef struct semd_matrix semd_matrix;
typedef struct semd_model semd_model;
typedef struct semd_result semd_result;

SEMD_API const char* semd_version(void);
SEMD_API const char* semd_status_name(semd_status status);
SEMD_API const char* semd_last_error(void);
/* Row index attached to the last error, or -1. */
SEMD_API int64_t semd_last_error_row(void);

/* ---- embeddings ------------------------------------------------------- */

SEMD_API semd_status semd_matrix_load(const char* path, semd_format format,
                                      semd_matrix** out);
/* ids may be NULL for 0..n-1. Data and ids are copied. */
SEMD_API semd_status semd_matrix_create(const float* data, uint64_t n,
                                        uint32_t d, const uint64_t* ids,
                                        semd_matrix** out);
SEMD_API semd_status semd_matrix_save(const semd_matrix* m, const char* path);
/* Produces a unit-norm copy; the engine entry points below require one. */
SEMD_API semd_status semd_matrix_normalize(const semd_matrix* m,
                                           semd_matrix** out);
SEMD_API int semd_matrix_is_unit(const semd_matrix* m);
SEMD_API uint64_t semd_matrix_rows(const semd_matrix* m);
SEMD_API uint32_t semd_matrix_dim(const semd_matrix* m);
SEMD_API const float* semd_matrix_data(const semd_matrix* m);
SEMD_API const uint64_t* semd_matrix_ids(const semd_matrix* m);
SEMD_API semd_status semd_matrix_write_subset(const semd_matrix* m,
                                              const uint64_t* keep_ids,
                                              size_t count, const char* path,
                                              uint64_t* written);
SEMD_API void semd_matrix_free(semd_matrix* m);

/* ---- spherical k-means ------------------------------------------------ */

typedef struct semd_kmeans_params {
  uint32_t k;
  uint32_t iterations;
  uint64_t seed;
  uint32_t threads; /* 0 = all available */
} semd_kmeans_params;

SEMD_API semd_kmeans_params semd_kmeans_params_default(void);
SEMD_API semd_status semd_kmeans_fit(const semd_matrix* unit,
                                     const semd_kmeans_params* params,
                                     semd_model** out);
SEMD_API semd_status semd_assign(const semd_matrix* unit,
                                 const float* centroids, uint32_t k,
                                 uint32_t threads, uint32_t* out_assignment);
SEMD_API semd_status semd_model_load(const char* path, semd_model** out);
SEMD_API semd_status semd_model_save(const semd_model* model, const char* path);
SEMD_API uint32_t semd_model_k(const semd_model* model);
SEMD_API uint32_t semd_model_dim(const semd_model* model);
SEMD_API uint64_t semd_model_size(const semd_model* model);
SEMD_API const float* semd_model_centroids(const semd_model* model);
SEMD_API const uint32_t* semd_model_assignment(const semd_model* model);
SEMD_API uint64_t semd_model_cluster_size(const semd_model* model, uint32_t c);
/* Empty for models read from disk. */
SEMD_API void semd_model_objective_trace(const semd_model* model,
                                         const double** values, size_t* count);
/* Writes m cluster indices to out. */
SEMD_API semd_status semd_model_nearest_clusters(const semd_model* model,
                                                 uint32_t c, uint32_t m,
                                                 uint32_t* out);
SEMD_API void semd_model_free(semd_model* model);

/* ---- deduplication ---------------------------------------------------- */

typedef struct semd_dedup_params {
  double epsilon; /* in (0, 1) */
  semd_strategy strategy;
  uint64_t seed; /* used by SEMD_KEEP_RANDOM only */
  uint32_t tile;
  uint32_t threads;
} semd_dedup_params;

SEMD_API semd_dedup_params semd_dedup_params_default(void);
SEMD_API semd_status semd_dedup_run(const semd_matrix* unit,
                                    const semd_model* model,
                                    const semd_dedup_params* params,
                                    semd_result** out);
SEMD_API uint64_t semd_result_size(const semd_result* r);
SEMD_API uint64_t semd_result_kept(const semd_result* r);
SEMD_API double semd_result_kept_fraction(const semd_result* r);
SEMD_API uint64_t semd_result_comparisons(const semd_result* r);
/* n bytes, 1 = kept. */
SEMD_API const uint8_t* semd_result_keep_mask(const semd_result* r);
/* k counts. */
SEMD_API const uint64_t* semd_result_cluster_removed(const semd_result* r,
                                                     uint32_t* k);
/* Each output array holds model k entries; any may be NULL. */
SEMD_API semd_status semd_result_cluster_stats(const semd_result* r,
                                               const semd_model* model,
                                               uint64_t* sizes,
                                               uint64_t* removed,
                                               double* removed_fraction);
SEMD_API void semd_result_free(semd_result* r);

/* Full-dataset kept fraction at each epsilon (strictly increasing). */
SEMD_API semd_status semd_sweep(const semd_matrix* unit,
                                const semd_model* model,
                                const semd_dedup_params* params,
                                const double* epsilons, size_t count,
                                double* out_fractions);

/* ---- threshold tuning ------------------------------------------------- */

/* Writes ceil(fraction * k) cluster indices (ascending) when capacity allows;
 * *count receives the required size either way. */
SEMD_API semd_status semd_sample_clusters(const semd_model* model,
                                          double fraction, uint64_t seed,
                                          uint32_t* out, size_t capacity,
                                          size_t* count);

SEMD_API semd_status semd_size_curve(const semd_matrix* unit,
                                     const semd_model* model,
                                     const uint32_t* sample,
                                     size_t sample_count,
                                     const semd_dedup_params* params,
                                     const double* epsilons, size_t count,
                                     double* out_fractions);

typedef struct semd_tune_params {
  double target_fraction;
  double eps_lo;
  double eps_hi;
  double tol_fraction;
  uint32_t max_probes;
  semd_strategy strategy;
  uint64_t seed;
  uint32_t tile;
  uint32_t threads;
} semd_tune_params;

typedef struct semd_tune_outcome {
  double epsilon;
  double achieved_fraction;
  uint32_t probes_used;
  int converged;
} semd_tune_outcome;

SEMD_API semd_tune_params semd_tune_params_default(void);
/* probe_eps / probe_fraction, when non-NULL, receive the probes in
 * evaluation order and must hold max_probes entries. Not converging is
 * reported through outcome->converged, not the status. */
SEMD_API semd_status semd_tune(const semd_matrix* unit, const semd_model* model,
                               const uint32_t* sample, size_t sample_count,
                               const semd_tune_params* params,
                               semd_tune_outcome* outcome, double* probe_eps,
                               double* probe_fraction);

/* ---- metrics ---------------------------------------------------------- */

SEMD_API semd_status semd_similarity_histogram(const semd_matrix* unit,
                                               const semd_model* model,
                                               size_t bins, uint32_t threads,
                                               uint64_t* counts);
SEMD_API semd_status semd_duplicate_incidence(const semd_matrix* unit,
                                              const semd_model* model,
                                              double epsilon, uint32_t threads,
                                              double* out);
SEMD_API semd_status semd_intersection_pct(const uint64_t* keep_a, size_t na,
                                           const uint64_t* keep_b, size_t nb,
                                           double* out);

typedef struct semd_efficiency {
  double eta;
  uint64_t within_pairs;
  uint64_t candidate_pairs;
  uint32_t neighbors;
} semd_efficiency;

SEMD_API semd_status semd_dedup_efficiency(const semd_matrix* unit,
                                           const semd_model* model,
                                           double epsilon, uint32_t neighbors,
                                           uint32_t threads,
                                           semd_efficiency* out);

/* ---- synthetic corpora ------------------------------------------------ */

typedef struct semd_planted_params {
  uint64_t n_groups;
  uint64_t group_size;
  uint32_t dim;
  double within_sim_target;
  uint64_t seed;
  double max_center_cosine;
} semd_planted_params;

SEMD_API semd_planted_params semd_planted_params_default(void);
/* group_of, when non-NULL, receives the group index of every row. */
SEMD_API semd_status semd_generate_planted(const semd_planted_params* params,
                                           semd_matrix** out,
                                           uint64_t* group_of,
                                           double* within_sim,
                                           double* across_sim);

#ifdef __cplusplus
}
#endif

#endif /* SEMDEDUP_SEMDEDUP_H_ */
