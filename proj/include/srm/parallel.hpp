#pragma once

#include <functional>

namespace srm {

/// Worker count from SRM_LAB_THREADS, else the hardware concurrency.
int default_thread_count();

/// Runs body(0..count-1) on up to `threads` workers (<= 0: default). Work is
/// handed out by index; callers store results by index so the outcome never
/// depends on scheduling. The exception of the lowest failing index wins.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace srm
