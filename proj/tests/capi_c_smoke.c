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

// Builds the header as plain C and runs a tiny end-to-end pass.

#include <stdio.h>

#include "semdedup/semdedup.h"

static int check(semd_status s, const char* what) {
  if (s != SEMD_OK) {
    fprintf(stderr, "%s: %s (%s)\n", what, semd_status_name(s),
            semd_last_error());
    return 1;
  }
  return 0;
}

int main(void) {
  const float data[] = {1.0f, 0.0f, 1.0f, 0.001f, 0.0f, 1.0f};
  semd_matrix* raw = NULL;
  semd_matrix* unit = NULL;
  semd_model* model = NULL;
  semd_result* result = NULL;
  int failed = 0;

  semd_kmeans_params kp = semd_kmeans_params_default();
  kp.k = 1;
  semd_dedup_params dp = semd_dedup_params_default();

  failed |= check(semd_matrix_create(data, 3, 2, NULL, &raw), "create");
  if (!failed) failed |= check(semd_matrix_normalize(raw, &unit), "normalize");
  if (!failed) failed |= check(semd_kmeans_fit(unit, &kp, &model), "fit");
  if (!failed) failed |= check(semd_dedup_run(unit, model, &dp, &result), "dedup");
  if (!failed && semd_result_kept(result) != 2) {
    fprintf(stderr, "expected 2 kept, got %llu\n",
            (unsigned long long)semd_result_kept(result));
    failed = 1;
  }
  semd_result_free(result);
  semd_model_free(model);
  semd_matrix_free(unit);
  semd_matrix_free(raw);
  return failed;
}
