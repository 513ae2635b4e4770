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

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semdedup::detail {

// 0 selects the OpenMP default. Thread count never changes results: every
// parallel loop in the library writes to per-item slots and reduces in a
// fixed order afterwards.
inline int resolve_threads(unsigned requested) noexcept {
#ifdef _OPENMP
  return requested == 0 ? omp_get_max_threads()
                         : static_cast<int>(requested);
#else
  (void)requested;
  return 1;
#endif
}

}  // namespace semdedup::detail
