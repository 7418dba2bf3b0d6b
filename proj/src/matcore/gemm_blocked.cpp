#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "prism/gemm.hpp"

#ifdef PRISM_HAVE_OPENMP
#include <omp.h>
#endif

namespace prism {

namespace {

// Micro-tile: kMr rows of A against kNr columns of B, held in registers.
constexpr std::size_t kMr = 6;
constexpr std::size_t kNr = 16;
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 96;   // multiple of kMr
constexpr std::size_t kNc = 2048; // multiple of kNr

using v8d = double __attribute__((vector_size(64)));

inline v8d load8(const double* p) {
  v8d v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

inline void store8(double* p, v8d v) { std::memcpy(p, &v, sizeof(v)); }

// acc[kMr][kNr] = sum_p a[p][r] * b[p][c] over packed panels.
void micro_kernel(std::size_t kc, const double* a, const double* b, double* acc) {
  v8d c00{}, c01{}, c10{}, c11{}, c20{}, c21{}, c30{}, c31{}, c40{}, c41{}, c50{}, c51{};
  for (std::size_t p = 0; p < kc; ++p) {
    const v8d b0 = load8(b);
    const v8d b1 = load8(b + 8);
    v8d ar;
    ar = v8d{} + a[0];
    c00 += ar * b0;
    c01 += ar * b1;
    ar = v8d{} + a[1];
    c10 += ar * b0;
    c11 += ar * b1;
    ar = v8d{} + a[2];
    c20 += ar * b0;
    c21 += ar * b1;
    ar = v8d{} + a[3];
    c30 += ar * b0;
    c31 += ar * b1;
    ar = v8d{} + a[4];
    c40 += ar * b0;
    c41 += ar * b1;
    ar = v8d{} + a[5];
    c50 += ar * b0;
    c51 += ar * b1;
    a += kMr;
    b += kNr;
  }
  store8(acc + 0 * kNr, c00);
  store8(acc + 0 * kNr + 8, c01);
  store8(acc + 1 * kNr, c10);
  store8(acc + 1 * kNr + 8, c11);
  store8(acc + 2 * kNr, c20);
  store8(acc + 2 * kNr + 8, c21);
  store8(acc + 3 * kNr, c30);
  store8(acc + 3 * kNr + 8, c31);
  store8(acc + 4 * kNr, c40);
  store8(acc + 4 * kNr + 8, c41);
  store8(acc + 5 * kNr, c50);
  store8(acc + 5 * kNr + 8, c51);
}

// Pack B[pc:pc+kc, jc:jc+nc] into kNr-wide column panels, zero padded.
void pack_b(std::size_t kc, std::size_t nc, const double* b, std::size_t ldb, double* out) {
  for (std::size_t jr = 0; jr < nc; jr += kNr) {
    const std::size_t w = std::min(kNr, nc - jr);
    for (std::size_t p = 0; p < kc; ++p) {
      const double* src = b + p * ldb + jr;
      std::size_t c = 0;
      for (; c < w; ++c) out[c] = src[c];
      for (; c < kNr; ++c) out[c] = 0.0;
      out += kNr;
    }
  }
}

// Pack A[ic:ic+mc, pc:pc+kc] into kMr-tall row panels, zero padded.
void pack_a(std::size_t mc, std::size_t kc, const double* a, std::size_t lda, double* out) {
  for (std::size_t ir = 0; ir < mc; ir += kMr) {
    const std::size_t h = std::min(kMr, mc - ir);
    for (std::size_t p = 0; p < kc; ++p) {
      std::size_t r = 0;
      for (; r < h; ++r) out[r] = a[(ir + r) * lda + p];
      for (; r < kMr; ++r) out[r] = 0.0;
      out += kMr;
    }
  }
}

int configured_threads() {
  const char* env = std::getenv("PRISM_THREADS");
  if (env == nullptr) return 0;
  const int v = std::atoi(env);
  return v > 0 ? v : 0;
}

int g_threads = configured_threads();

}  // namespace

int kernel_threads() {
#ifdef PRISM_HAVE_OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

void set_kernel_threads(int threads) { g_threads = threads > 0 ? threads : 0; }

void gemm_blocked(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c) {
  std::fill(c, c + m * n, 0.0);
  if (k == 0) return;

  std::vector<double> packed_b(kKc * (((std::min(n, kNc) + kNr - 1) / kNr) * kNr));
  const int threads = kernel_threads();

  for (std::size_t jc = 0; jc < n; jc += kNc) {
    const std::size_t nc = std::min(kNc, n - jc);
    for (std::size_t pc = 0; pc < k; pc += kKc) {
      const std::size_t kc = std::min(kKc, k - pc);
      pack_b(kc, nc, b + pc * n + jc, n, packed_b.data());
      const std::ptrdiff_t row_blocks = static_cast<std::ptrdiff_t>((m + kMc - 1) / kMc);

#ifdef PRISM_HAVE_OPENMP
#pragma omp parallel num_threads(threads) if (threads > 1 && row_blocks > 1)
#endif
      {
        std::vector<double> packed_a(kMc * kKc);
        alignas(64) double acc[kMr * kNr];
#ifdef PRISM_HAVE_OPENMP
#pragma omp for schedule(static)
#endif
        for (std::ptrdiff_t blk = 0; blk < row_blocks; ++blk) {
          const std::size_t ic = static_cast<std::size_t>(blk) * kMc;
          const std::size_t mc = std::min(kMc, m - ic);
          pack_a(mc, kc, a + ic * k + pc, k, packed_a.data());
          for (std::size_t jr = 0; jr < nc; jr += kNr) {
            const std::size_t w = std::min(kNr, nc - jr);
            const double* bp = packed_b.data() + (jr / kNr) * kc * kNr;
            for (std::size_t ir = 0; ir < mc; ir += kMr) {
              const std::size_t h = std::min(kMr, mc - ir);
              micro_kernel(kc, packed_a.data() + (ir / kMr) * kc * kMr, bp, acc);
              for (std::size_t r = 0; r < h; ++r) {
                double* crow = c + (ic + ir + r) * n + jc + jr;
                const double* arow = acc + r * kNr;
                for (std::size_t q = 0; q < w; ++q) crow[q] += arow[q];
              }
            }
          }
        }
      }
      (void)threads;
    }
  }
}

}  // namespace prism
