#pragma once

#include <cstddef>
#include <functional>

namespace oilsense {

// Number of worker threads actually used for `requested` (0 = all hardware
// threads, minimum 1).
unsigned effective_threads(unsigned requested);

// Runs fn(i) for i in [begin, end) across `threads` workers in fixed
// contiguous blocks.  Work items must be independent; because every item
// writes only its own slot and derives its own seed, the thread count never
// affects results.
void parallel_for(std::size_t begin, std::size_t end, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace oilsense
