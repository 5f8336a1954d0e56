#pragma once

#include <cstddef>
#include <functional>

namespace kgrec {

/// Worker count: hardware concurrency, capped by KGREC_THREADS when set.
std::size_t worker_count();

/// Runs `body(begin, end)` over contiguous chunks of [0, n) on up to
/// `threads` workers and joins. Chunk boundaries depend only on n and
/// `threads`, so per-index results are independent of scheduling.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace kgrec
