#include "pathmamba/parallel.hpp"

#include <atomic>
#include <cstdlib>

namespace pathmamba {

namespace {

bool initial_enabled() {
    const char* env = std::getenv("PATHMAMBA_SERIAL");
    return !(env && env[0] == '1');
}

std::atomic<bool>& flag() {
    static std::atomic<bool> enabled{initial_enabled()};
    return enabled;
}

}  // namespace

bool parallel_enabled() { return flag().load(std::memory_order_relaxed); }

void set_parallel_enabled(bool enabled) {
    flag().store(enabled, std::memory_order_relaxed);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace pathmamba
