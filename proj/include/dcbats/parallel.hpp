#pragma once

#include <cstddef>
#include <functional>

namespace dcbats {

/// 0 means "all hardware threads".
unsigned resolve_threads(unsigned requested);

/// Runs fn(0..n-1) on a bounded pool of worker threads.
///
/// Tasks must write to disjoint outputs. If any task throws, the remaining
/// tasks still run and the exception of the lowest failing index is rethrown,
/// so failures do not depend on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace dcbats
