#pragma once

#include <cstddef>
#include <functional>

namespace dpinv {

/// Process-wide worker count used when a call does not pass one. Defaults to 1.
int default_workers();
void set_default_workers(int workers);

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// handled exactly once; results must be written to per-index slots so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// body is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int workers = 0);

}  // namespace dpinv
