#pragma once

#include <cstddef>
#include <functional>

namespace keyrate {

// Force single-threaded BLAS/LAPACK by setting the usual environment knobs
// (OPENBLAS_NUM_THREADS, OMP_NUM_THREADS) unless the user already set them.
// Threading is managed at the task level by parallel_for; letting the BLAS
// spawn its own pool on top of that both oversubscribes cores and perturbs
// reduction order. Call once at process start, before any BLAS call.
void pin_blas_threads();

// Thread budget shared by all parallel_for calls. Defaults to the
// KEYRATE_THREADS environment variable if set, otherwise the hardware
// concurrency. set_max_threads(n) overrides it for the process (n >= 1).
int max_threads();
void set_max_threads(int n);

// Run task(i) for i in [0, n_tasks) on up to max_threads() workers.
//
// Work is split statically: worker w handles every index i with
// i % n_workers == w. Results must be written to per-index storage by the
// task; any reduction the caller performs afterwards over index order is
// then bit-identical regardless of the worker count. Exceptions thrown by
// tasks are captured and the first one (by index) is rethrown on the caller
// thread after all workers join.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& task);

}  // namespace keyrate
