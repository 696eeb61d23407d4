// Copyright 2026 The Geolink Authors.
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

#ifndef GEOLINK_PARALLEL_HPP_
#define GEOLINK_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

namespace geolink {

// Resolves a requested parallelism degree; <= 0 means hardware concurrency.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Runs fn(i) for i in [0, n) over contiguous blocks, one per thread. Each
// block stops at its first exception; the exception with the lowest index is
// rethrown, so failures surface the same way at any thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(
      std::clamp<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                              1, std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> error_at(workers,
                                    std::numeric_limits<std::size_t>::max());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = w * block;
      const std::size_t end = std::min(n, begin + block);
      for (std::size_t i = begin; i < end; ++i) {
        try {
          fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          error_at[w] = i;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  const auto first = std::min_element(error_at.begin(), error_at.end());
  if (*first != std::numeric_limits<std::size_t>::max()) {
    std::rethrow_exception(errors[first - error_at.begin()]);
  }
}

}  // namespace geolink

#endif  // GEOLINK_PARALLEL_HPP_
