#pragma once

#include <cstdint>
#include <functional>

namespace lab {

// Worker pool size used by parallel_for.  Results of every parallel loop in
// this project are written into per-index slots and reduced in index order,
// so they do not depend on this value; it only controls wall-clock time.
void set_worker_count(int workers);
int worker_count();

// Runs fn(i) for i in [0, count).  Work is split into contiguous chunks,
// one batch of chunks per worker.  fn must only write to state owned by
// index i.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn);

}  // namespace lab
