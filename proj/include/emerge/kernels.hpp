#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Data-parallel inner loops shared by the Monte Carlo harness and the grid
// scans, each in two variants: a plain serial reference and an OpenMP kernel.
// The parallel kernels accumulate over fixed-size chunks and combine partial
// results in chunk order, so their output is bit-identical for any thread
// count. The serial variants are the reference the tests compare against.
namespace emerge::kernels {

inline constexpr std::size_t kChunk = 8192;

// Running sum / sum of squares for a Monte Carlo mean and standard error.
struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
  double variance() const;
  // Standard error of the mean.
  double std_error() const;
};

// Largest value with the lowest index winning ties.
struct ScanMax {
  std::size_t index = 0;
  double value = 0.0;
  bool empty = true;

  void consider(std::size_t i, double v) {
    if (empty || v > value) {
      index = i;
      value = v;
      empty = false;
    }
  }
};

// Number of threads the parallel kernels will use (1 without OpenMP).
int max_threads();

template <class F>
MeanAccumulator accumulate_serial(std::size_t n, F&& f) {
  MeanAccumulator acc;
  for (std::size_t i = 0; i < n; ++i) {
    double v = f(i);
    acc.sum += v;
    acc.sum_sq += v * v;
  }
  acc.count = n;
  return acc;
}

template <class F>
MeanAccumulator accumulate_parallel(std::size_t n, F&& f) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> sums(chunks, 0.0), squares(chunks, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (long long c = 0; c < static_cast<long long>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = begin + kChunk < n ? begin + kChunk : n;
    double s = 0.0, sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      double v = f(i);
      s += v;
      sq += v * v;
    }
    sums[static_cast<std::size_t>(c)] = s;
    squares[static_cast<std::size_t>(c)] = sq;
  }
  MeanAccumulator acc;
  for (std::size_t c = 0; c < chunks; ++c) {
    acc.sum += sums[c];
    acc.sum_sq += squares[c];
  }
  acc.count = n;
  return acc;
}

template <class F>
ScanMax scan_max_serial(std::size_t n, F&& f) {
  ScanMax best;
  for (std::size_t i = 0; i < n; ++i) best.consider(i, f(i));
  return best;
}

template <class F>
ScanMax scan_max_parallel(std::size_t n, F&& f) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<ScanMax> partial(chunks);
#pragma omp parallel for schedule(dynamic)
  for (long long c = 0; c < static_cast<long long>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = begin + kChunk < n ? begin + kChunk : n;
    ScanMax best;
    for (std::size_t i = begin; i < end; ++i) best.consider(i, f(i));
    partial[static_cast<std::size_t>(c)] = best;
  }
  ScanMax best;
  for (const auto& p : partial) {
    if (!p.empty) best.consider(p.index, p.value);
  }
  return best;
}

template <class F>
MeanAccumulator accumulate(std::size_t n, F&& f) {
  if (n < 2 * kChunk || max_threads() == 1) {
    return accumulate_serial(n, f);
  }
  return accumulate_parallel(n, f);
}

template <class F>
ScanMax scan_max(std::size_t n, F&& f) {
  if (n < 2 * kChunk || max_threads() == 1) {
    return scan_max_serial(n, f);
  }
  return scan_max_parallel(n, f);
}

}  // namespace emerge::kernels
