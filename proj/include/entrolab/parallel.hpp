#pragma once

#include <cstddef>
#include <functional>

namespace entrolab {

/// Global worker cap used by parallel_for; 0 means hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(i) for i in [0, count). Bodies must write only to their own
/// output slot; callers merge slots in index order, so results do not depend
/// on the thread count. Calls made from inside a worker run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace entrolab
