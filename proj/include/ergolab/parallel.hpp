#pragma once

#include <cstddef>
#include <algorithm>
#include <cstdint>
#include <exception>
#include <vector>

#include "ergolab/common.hpp"

namespace ergolab {

/// Runs body(i) for i in [0, count). The parallel path uses a static OpenMP
/// schedule; bodies must write only to slot i of their outputs so that the
/// result is independent of the worker count.
template <class Body>
void for_each_member(Exec exec, std::int64_t count, Body&& body) {
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  const int workers = worker_count();
  // Exceptions must not leave the parallel region: keep the one from the
  // lowest member index, which is what the serial path would have thrown.
  std::exception_ptr error;
  std::int64_t error_index = count;
#pragma omp parallel for schedule(static) num_threads(workers)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(ergolab_member_error)
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Splits [0, count) into `blocks` contiguous ranges fixed by count alone and
/// returns body(begin, end) for each, in range order. Reducing the returned
/// partials in order gives results independent of the worker count.
template <class Partial, class Body>
std::vector<Partial> map_blocks(Exec exec, std::int64_t count, std::int64_t blocks, Body&& body) {
  blocks = std::max<std::int64_t>(1, std::min(blocks, count));
  std::vector<Partial> parts(static_cast<std::size_t>(blocks));
  for_each_member(exec, blocks, [&](std::int64_t b) {
    parts[static_cast<std::size_t>(b)] = body(count * b / blocks, count * (b + 1) / blocks);
  });
  return parts;
}

}  // namespace ergolab
