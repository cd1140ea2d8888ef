#pragma once

#include <cstddef>
#include <vector>

namespace filmrec::parallel {

// Process-wide kernel thread budget. 1 selects the serial code paths,
// 0 resolves to the hardware concurrency.
void set_max_threads(int n);
int max_threads();
inline bool enabled() { return max_threads() > 1; }

namespace detail {
void run_indexed(int n, void (*fn)(int, void*), void* ctx, bool parallel);
}

// Runs fn(i) for i in [0,n). Iterations must be independent; outputs are
// then identical whatever the thread count.
template <class Fn>
void for_n(int n, Fn&& fn, bool force_serial = false) {
  auto trampoline = [](int i, void* ctx) { (*static_cast<Fn*>(ctx))(i); };
  detail::run_indexed(n, trampoline, &fn, !force_serial && enabled());
}

// Deterministic chunked sum of fn(i) over [0,n): fixed-size chunks are
// accumulated serially and combined in chunk order, so the result does not
// depend on the thread count. The flat serial order is the test reference
// and agrees within roundoff.
inline constexpr size_t kReduceChunk = 4096;

namespace detail {
void sum_chunks(size_t n, double (*chunk_fn)(size_t, size_t, void*), void* ctx,
                double* partials, size_t nchunks, bool parallel);
}

template <class Fn>
double sum_chunked(size_t n, Fn&& fn) {
  if (n == 0) return 0.0;
  const size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  auto chunk_fn = [](size_t begin, size_t end, void* ctx) {
    double acc = 0.0;
    auto& f = *static_cast<Fn*>(ctx);
    for (size_t i = begin; i < end; ++i) acc += f(i);
    return acc;
  };
  if (nchunks == 1) return chunk_fn(0, n, &fn);
  std::vector<double> partials(nchunks, 0.0);
  detail::sum_chunks(n, chunk_fn, &fn, partials.data(), nchunks, enabled());
  double total = 0.0;
  for (double p : partials) total += p;
  return total;
}

}  // namespace filmrec::parallel
