#pragma once

#include <cstddef>
#include <functional>

namespace qksvm {

// Worker count used when a caller passes jobs <= 0: QKSVM_JOBS if set,
// otherwise the hardware concurrency.
int default_jobs();

// Runs body(i) for i in [0, count) on up to `jobs` threads. Indices are handed
// out dynamically, so body must only write state owned by index i. The first
// exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace qksvm
