#pragma once

#include <cstddef>
#include <functional>

namespace odmforge::core {

/// Worker cap: ODMFORGE_THREADS when set (min 1), else hardware concurrency.
int worker_count();

/// Runs f(i) for i in [0, n). Work is chunked across worker threads; each
/// index runs exactly once, so callers writing to slot i of a pre-sized
/// output stay deterministic regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

} // namespace odmforge::core
