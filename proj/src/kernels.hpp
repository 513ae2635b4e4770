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

namespace semdedup::detail {

// Inner product of two float32 vectors accumulated in double across eight
// fixed lanes. The lane layout and final fold order are fixed, so the result
// is bit-identical no matter which instruction set the clone dispatches to.
double dot(const float* a, const float* b, std::size_t d) noexcept;

}  // namespace semdedup::detail
