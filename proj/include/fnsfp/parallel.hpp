#pragma once

#include <cstddef>
#include <functional>

namespace fnsfp {

// FNSFP_THREADS, else hardware concurrency. Read on every call so tests can
// change it between runs.
unsigned thread_count();

// Runs body(begin, end) over contiguous static chunks of [0, n). Callers
// write only to per-index outputs, so results never depend on the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace fnsfp
