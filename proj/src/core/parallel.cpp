#include "filmrec/core/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <thread>

namespace filmrec::parallel {

namespace {
std::atomic<int> g_max_threads{1};

int resolve(int n) {
  if (n > 0) return n;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return hw > 0 ? hw : 1;
}
}  // namespace

void set_max_threads(int n) { g_max_threads.store(resolve(n)); }

int max_threads() { return g_max_threads.load(); }

namespace detail {

void run_indexed(int n, void (*fn)(int, void*), void* ctx, bool parallel) {
  if (parallel) {
    const int threads = max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int i = 0; i < n; ++i) fn(i, ctx);
  } else {
    for (int i = 0; i < n; ++i) fn(i, ctx);
  }
}

void sum_chunks(size_t n, double (*chunk_fn)(size_t, size_t, void*), void* ctx,
                double* partials, size_t nchunks, bool parallel) {
  const auto body = [&](size_t c) {
    const size_t begin = c * kReduceChunk;
    const size_t end = std::min(n, begin + kReduceChunk);
    partials[c] = chunk_fn(begin, end, ctx);
  };
  if (parallel) {
    const int threads = max_threads();
    const long long m = static_cast<long long>(nchunks);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long c = 0; c < m; ++c) body(static_cast<size_t>(c));
  } else {
    for (size_t c = 0; c < nchunks; ++c) body(c);
  }
}

}  // namespace detail

}  // namespace filmrec::parallel
