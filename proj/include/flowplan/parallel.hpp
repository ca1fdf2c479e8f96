#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flowplan {

/// Worker count actually used for `requested` (0 = all hardware threads).
inline int resolve_workers(int requested) {
#ifdef _OPENMP
    if (requested <= 0) return omp_get_max_threads();
    return requested;
#else
    (void)requested;
    return 1;
#endif
}

/// Runs body(i) for i in [0, count). workers == 1 is the serial reference
/// path; otherwise iterations are distributed across an OpenMP team. Bodies
/// must write only to their own slot of a preallocated output.
template <typename Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
    const int n = resolve_workers(workers);
#ifdef _OPENMP
    if (n > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(n)
        for (long long i = 0; i < static_cast<long long>(count); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace flowplan
