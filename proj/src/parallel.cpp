#include "superrl/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace superrl {

namespace {
#ifdef _OPENMP
ExecMode g_mode = ExecMode::OpenMP;
#else
ExecMode g_mode = ExecMode::Serial;
#endif
}  // namespace

ExecMode exec_mode() { return g_mode; }

void set_exec_mode(ExecMode mode) { g_mode = mode; }

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace detail {

void for_each_index_serial(std::size_t n, void* ctx, void (*body)(void*, std::size_t)) {
    for (std::size_t i = 0; i < n; ++i) {
        body(ctx, i);
    }
}

void for_each_index_omp(std::size_t n, void* ctx, void (*body)(void*, std::size_t)) {
#ifdef _OPENMP
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        body(ctx, static_cast<std::size_t>(i));
    }
#else
    for_each_index_serial(n, ctx, body);
#endif
}

}  // namespace detail

}  // namespace superrl
