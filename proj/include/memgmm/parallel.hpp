#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "memgmm/types.hpp"

namespace memgmm {

/// Maps a requested worker count to an actual one; 0 means all available cores.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
#ifdef _OPENMP
  return std::max(1, omp_get_max_threads());
#else
  return std::max(1u, std::thread::hardware_concurrency());
#endif
}

namespace detail {

inline constexpr Index kRowBlock = 512;

/// Runs fn(begin, size) over fixed row blocks of [0, n). Block boundaries do
/// not depend on the worker count, and every kernel that uses this is
/// element-wise across rows, so results are identical for any thread count.
/// If several blocks throw, the exception from the lowest block is rethrown.
template <typename Fn>
void for_each_row_block(Index n, int threads, Fn&& fn) {
  const Index blocks = (n + kRowBlock - 1) / kRowBlock;
  if (blocks == 0) return;
  const int workers = static_cast<int>(std::min<Index>(resolve_threads(threads), blocks));
  if (workers <= 1) {
    for (Index b = 0; b < blocks; ++b) fn(b * kRowBlock, std::min(kRowBlock, n - b * kRowBlock));
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<size_t>(blocks));
#pragma omp parallel for num_threads(workers) schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    try {
      fn(b * kRowBlock, std::min(kRowBlock, n - b * kRowBlock));
    } catch (...) {
      errors[static_cast<size_t>(b)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail
}  // namespace memgmm
