#include "emerge/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace emerge::kernels {

double MeanAccumulator::variance() const {
  if (count < 2) return 0.0;
  const double n = static_cast<double>(count);
  double v = (sum_sq - sum * sum / n) / (n - 1.0);
  return v > 0.0 ? v : 0.0;
}

double MeanAccumulator::std_error() const {
  if (count < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(count));
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace emerge::kernels
