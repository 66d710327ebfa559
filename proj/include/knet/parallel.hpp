#pragma once

#include <cstddef>
#include <functional>

namespace knet {

// KNET_THREADS caps the pool; deterministic mode forces one worker.
std::size_t worker_count(bool deterministic);

// Runs body(i) for i in [0, n) on up to `workers` threads; the first exception is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace knet
