#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pathmamba {

// Runtime switch between the OpenMP kernels and their serial reference
// paths. Tests and the benchmark flip this to compare the two; the
// PATHMAMBA_SERIAL=1 environment variable forces serial execution.
bool parallel_enabled();
void set_parallel_enabled(bool enabled);
int max_threads();

// Data-parallel loop. Every iteration must write to disjoint locations;
// under that contract results are bit-identical for any thread count.
template <typename Fn>
void parallel_for(int64_t n, int64_t grain, Fn&& fn) {
#ifdef _OPENMP
    if (parallel_enabled() && n >= 2 * grain && max_threads() > 1) {
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
#endif
    for (int64_t i = 0; i < n; ++i) fn(i);
}

template <typename Fn>
void parallel_for(int64_t n, Fn&& fn) {
    parallel_for(n, 1, static_cast<Fn&&>(fn));
}

}  // namespace pathmamba
