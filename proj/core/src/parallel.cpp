#include "oilsense/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace oilsense {

unsigned effective_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

void parallel_for(std::size_t begin, std::size_t end, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (end <= begin) return;
  std::size_t span = end - begin;
  unsigned workers = effective_threads(threads);
  if (workers > span) workers = static_cast<unsigned>(span);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  std::size_t chunk = span / workers;
  std::size_t extra = span % workers;
  std::size_t start = begin;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t stop = start + chunk + (w < extra ? 1 : 0);
    pool.emplace_back([start, stop, w, &fn, &errors] {
      try {
        for (std::size_t i = start; i < stop; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
    start = stop;
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace oilsense
