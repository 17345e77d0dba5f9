// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace qlab {

// Thread cap for data-parallel loops: min(hardware threads, QLAB_THREADS
// when set and positive). Always at least 1.
std::size_t thread_cap();

// Runs fn(i) for i in [0, count) across up to thread_cap() threads in
// contiguous index blocks. Each index is visited exactly once, so writes
// to preallocated per-index slots give results identical to a serial
// loop. Exceptions from workers are rethrown on the caller thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace qlab
