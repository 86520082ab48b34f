#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace obeskit::exec {

// Worker budget for all data-parallel kernels. 1 disables threading.
void set_max_workers(int n);
int max_workers();

// Runs body(i) for i in [0, n). Iterations must be independent: each writes
// only its own output slot, so results are identical to the serial loop.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
#ifdef _OPENMP
    const int workers = max_workers();
    if (workers > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(workers)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace obeskit::exec
