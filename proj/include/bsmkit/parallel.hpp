// Copyright 2026 The bsmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace bsm {

/// Worker count: hardware concurrency, capped by BSMKIT_THREADS when set.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n). Each index is visited exactly once; the first
/// exception by index order is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t max_workers = 0);

}  // namespace bsm
