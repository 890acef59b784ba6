#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ialut {

inline int hardware_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// workers <= 0 means "use everything available".
inline int resolve_workers(int workers) {
  return workers > 0 ? workers : hardware_workers();
}

/*
 * Deterministic parallel reduction: fixed-size blocks are summed
 * independently and the partials combined serially in block order, so the
 * result is bit-identical regardless of worker count.
 */
inline constexpr std::int64_t kReduceBlock = 8192;

template <class Term>
double blocked_sum(std::int64_t n, Term&& term, int workers = 0) {
  if (n <= 0) return 0.0;
  const std::int64_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
  const int w = resolve_workers(workers);
#pragma omp parallel for schedule(static) num_threads(w)
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::int64_t lo = b * kReduceBlock;
    const std::int64_t hi = std::min(n, lo + kReduceBlock);
    double acc = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) acc += term(static_cast<std::size_t>(i));
    partial[static_cast<std::size_t>(b)] = acc;
  }
  double total = 0.0;
  for (const double p : partial) total += p;
  return total;
}

// Element-wise parallel loop; the body must write only to its own index.
template <class Body>
void parallel_for(std::int64_t n, Body&& body, int workers = 0) {
  const int w = resolve_workers(workers);
#pragma omp parallel for schedule(static) num_threads(w)
  for (std::int64_t i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace ialut
