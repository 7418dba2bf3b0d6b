#pragma once

#include <cstddef>
#include <vector>

#include "prism/mat.hpp"

namespace prism {

// Row-major GEMM kernels, C = A * B with A m x k, B k x n, C m x n (all dense, unit stride).
//
// gemm_serial_reference is the naive triple loop kept as a test oracle.
// gemm_blocked is the packed, register-blocked kernel; its row panels are distributed
// with OpenMP. Each output entry accumulates over k in a fixed order, so the result
// is bit-identical for every thread count.
void gemm_serial_reference(std::size_t m, std::size_t k, std::size_t n, const double* a,
                           const double* b, double* c);
void gemm_blocked(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c);

// a * b. Throws ShapeError on a.cols() != b.rows().
Mat mat_mul(const Mat& a, const Mat& b);
// a^T * b
Mat mat_mul_tn(const Mat& a, const Mat& b);
// a^T * a, symmetrized.
Mat gram(const Mat& a);
// Same contract as mat_mul, computed by the naive reference kernel.
Mat mat_mul_reference(const Mat& a, const Mat& b);

/// Records the shape of every mat_mul issued on the installing thread while alive.
/// Used by tests to audit which products an algorithm performs.
class ProductLog {
 public:
  struct Entry {
    std::size_t m, k, n;
  };

  ProductLog();
  ~ProductLog();
  ProductLog(const ProductLog&) = delete;
  ProductLog& operator=(const ProductLog&) = delete;

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  // Number of products whose three dimensions all equal dim.
  std::size_t count_square(std::size_t dim) const noexcept;
  void record(std::size_t m, std::size_t k, std::size_t n) { entries_.push_back({m, k, n}); }

 private:
  std::vector<Entry> entries_;
  ProductLog* previous_;
};

// Threads used by gemm_blocked. Reads PRISM_THREADS once; 0 or unset means the OpenMP default.
int kernel_threads();
void set_kernel_threads(int threads);

}  // namespace prism
