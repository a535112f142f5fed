#pragma once

#include <functional>

namespace mixedmop {

/// Worker count: MIXEDMOP_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads. Indices are
/// handed out dynamically; the first exception thrown by a body is rethrown.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace mixedmop
