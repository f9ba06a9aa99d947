#pragma once

#include <cstddef>

namespace superrl {

/// Execution mode for the batch-level kernels. Serial is the reference
/// implementation; OpenMP fans the same loop body out across threads.
/// Both modes must produce bit-identical results: loop bodies write only
/// to their own index slot and reductions happen afterwards in fixed order.
enum class ExecMode { Serial, OpenMP };

ExecMode exec_mode();
void set_exec_mode(ExecMode mode);

/// Number of worker threads the OpenMP mode would use (1 when built without OpenMP).
int max_threads();

namespace detail {
void for_each_index_serial(std::size_t n, void* ctx, void (*body)(void*, std::size_t));
void for_each_index_omp(std::size_t n, void* ctx, void (*body)(void*, std::size_t));
}  // namespace detail

/// Runs body(i) for i in [0, n), serial or OpenMP depending on the current mode.
/// body must not touch shared mutable state outside its own slot.
template <typename Body>
void for_each_index(std::size_t n, Body&& body) {
    auto trampoline = [](void* ctx, std::size_t i) { (*static_cast<Body*>(ctx))(i); };
    if (exec_mode() == ExecMode::OpenMP) {
        detail::for_each_index_omp(n, &body, trampoline);
    } else {
        detail::for_each_index_serial(n, &body, trampoline);
    }
}

}  // namespace superrl
