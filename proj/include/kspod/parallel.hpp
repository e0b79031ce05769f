#pragma once

#include <cstddef>
#include <functional>

namespace kspod {

/// Worker count: KSPOD_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, count). Iterations must not share mutable state.
/// If any iteration throws, the exception from the lowest index is rethrown
/// after all workers finish, so failures are reported deterministically.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace kspod
