#pragma once

#include <functional>

namespace ksymp {

/// Number of workers: KSYMP_THREADS when set (>= 1), else the hardware
/// concurrency.
int worker_count();

/// Run f(0..n-1) across workers. Results must be written to disjoint,
/// index-addressed slots; ordering is unspecified but coverage is exact.
void parallel_for(int n, const std::function<void(int)>& f);

} // namespace ksymp
