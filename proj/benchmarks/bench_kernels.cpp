// Compares the serial reference kernels against the OpenMP variants on the
// two hot loops: Monte Carlo accumulation and grid max scans.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "emerge/kernels.hpp"
#include "emerge/rng.hpp"
#include "emerge/subclasses.hpp"

using namespace emerge;

namespace {

template <class F>
double time_seconds(F&& work) {
  const auto start = std::chrono::steady_clock::now();
  work();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %5.2fx\n",
              name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10)
                                 : std::size_t{10000000};
  std::printf("n = %zu, threads = %d\n", n, kernels::max_threads());

  auto exponential_draw = [](std::size_t i) {
    auto stream = rng::replication_stream(1, i);
    return stream.exponential();
  };
  double sum_serial = 0.0, sum_parallel = 0.0;
  const double t_acc_serial = time_seconds([&] {
    sum_serial = kernels::accumulate_serial(n, exponential_draw).sum;
  });
  const double t_acc_parallel = time_seconds([&] {
    sum_parallel = kernels::accumulate_parallel(n, exponential_draw).sum;
  });
  report("mc accumulate", t_acc_serial, t_acc_parallel);
  std::printf("  sums: serial %.6f parallel %.6f (relative difference %.2e)\n",
              sum_serial, sum_parallel,
              std::abs(sum_serial - sum_parallel) /
                  (std::abs(sum_serial) + 1e-300));

  subclasses::PermutationSampler sampler({0.0, 0.5, 1.0, 1.5, 2.0});
  auto merge_draw = [&](std::size_t i) {
    auto stream = rng::replication_stream(2, i);
    std::vector<double> e;
    sampler.draw(stream, e);
    return subclasses::exchangeable_merge(2.0, EValueVector(e));
  };
  const std::size_t reps = n / 4;
  double mc_serial = 0.0, mc_parallel = 0.0;
  const double t_mc_serial = time_seconds([&] {
    mc_serial = kernels::accumulate_serial(reps, merge_draw).mean();
  });
  const double t_mc_parallel = time_seconds([&] {
    mc_parallel = kernels::accumulate_parallel(reps, merge_draw).mean();
  });
  report("exchangeable simulation", t_mc_serial, t_mc_parallel);
  std::printf("  means: serial %.6f parallel %.6f\n", mc_serial, mc_parallel);

  auto grid_value = [](std::size_t i) {
    const double x = static_cast<double>(i % 4096) / 4096.0;
    const double y = static_cast<double>(i / 4096 % 4096) / 4096.0;
    return 0.6 * x + 0.4 * y - (x > y ? 0.1 : 0.0);
  };
  kernels::ScanMax scan_serial, scan_parallel;
  const double t_scan_serial = time_seconds([&] {
    scan_serial = kernels::scan_max_serial(n, grid_value);
  });
  const double t_scan_parallel = time_seconds([&] {
    scan_parallel = kernels::scan_max_parallel(n, grid_value);
  });
  report("grid max scan", t_scan_serial, t_scan_parallel);
  std::printf("  argmax: serial %zu parallel %zu (values equal: %s)\n",
              scan_serial.index, scan_parallel.index,
              scan_serial.value == scan_parallel.value ? "yes" : "no");
  return 0;
}
