#pragma once

#include <cstddef>
#include <functional>

namespace stocon {

// Work is split into fixed-size chunks whose boundaries depend only on n,
// never on the thread count, so any per-index output and any chunk-ordered
// reduction is bitwise identical for threads=1 and threads=k.

// Runs body(begin, end) for each chunk of [0, n). threads <= 1 runs inline.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

// Sum of term(i) for i in [0, n): per-chunk left-to-right partials, added in
// chunk order.
double parallel_sum(std::size_t n, int threads,
                    const std::function<double(std::size_t)>& term);

}  // namespace stocon
