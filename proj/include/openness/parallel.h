#pragma once

#include <cstddef>
#include <functional>

namespace openness {

/// Worker cap: OPENNESS_CERT_THREADS when set to a positive integer, else the
/// hardware concurrency.
int WorkerCount();

/// Splits [0, n) into contiguous chunks and runs `body(begin, end)` on up to
/// WorkerCount() threads. Calls made from inside a worker run inline, so
/// nested loops do not oversubscribe. Each index is visited exactly once and
/// chunk boundaries depend only on n and the worker count.
void ParallelFor(std::size_t n,
                 const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace openness
