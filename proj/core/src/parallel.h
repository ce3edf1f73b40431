// Copyright 2026 The TicLens Authors
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

#ifndef TICLENS_SRC_PARALLEL_H_
#define TICLENS_SRC_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ticlens::internal {

// Runs fn(begin, end, chunk) over `threads` contiguous ranges of [0, n).
// Chunk k always covers the same range for a given (n, threads), and the
// first exception by chunk order is rethrown after all workers finish.
template <class Fn>
void parallel_chunks(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)),
                            std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t k = 0; k < workers; ++k) {
    const std::size_t begin = n * k / workers;
    const std::size_t end = n * (k + 1) / workers;
    pool.emplace_back([&, begin, end, k] {
      try {
        fn(begin, end, k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::size_t chunk_count(std::size_t n, int threads) {
  return std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)),
                               std::max<std::size_t>(n, 1));
}

}  // namespace ticlens::internal

#endif  // TICLENS_SRC_PARALLEL_H_
