#include "prism/gemm.hpp"

namespace prism {

void gemm_serial_reference(std::size_t m, std::size_t k, std::size_t n, const double* a,
                           const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
}

}  // namespace prism
