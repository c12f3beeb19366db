#pragma once

#include <functional>

namespace otdcov {

/// Worker count for embarrassingly parallel loops: machine parallelism,
/// capped by the OTDCOV_THREADS environment variable (re-read per call so
/// tests can vary it within one process).
int worker_count();

/// Runs fn(i) for i in [0, count) on worker_count() threads with a static
/// block partition. Each index owns its output slot and its own derived RNG
/// stream, so results are identical at any thread count.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace otdcov
