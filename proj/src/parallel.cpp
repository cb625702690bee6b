#include "stocon/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace stocon {

namespace {
constexpr std::size_t kChunk = 256;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;
  if (threads <= 1 || nchunks == 1) {
    for (std::size_t c = 0; c < nchunks; ++c) {
      const std::size_t b = c * kChunk;
      body(b, std::min(n, b + kChunk));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= nchunks) return;
      const std::size_t b = c * kChunk;
      body(b, std::min(n, b + kChunk));
    }
  };
  const int nw = static_cast<int>(std::min<std::size_t>(threads, nchunks));
  std::vector<std::thread> pool;
  pool.reserve(nw - 1);
  for (int t = 1; t < nw; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

double parallel_sum(std::size_t n, int threads,
                    const std::function<double(std::size_t)>& term) {
  if (n == 0) return 0.0;
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += term(i);
    partial[b / kChunk] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace stocon
