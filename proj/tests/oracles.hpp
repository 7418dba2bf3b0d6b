#pragma once

// Independent reference computations for the test suites. Nothing here calls into the
// library's numerical kernels; only the Mat container is shared.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "prism/mat.hpp"

namespace oracle {

using prism::Mat;

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0.0L;
      for (std::size_t p = 0; p < a.cols(); ++p) s += static_cast<long double>(a(i, p)) * b(p, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

inline Mat identity(std::size_t n) {
  Mat m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

inline Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline double fro(const Mat& a) {
  long double s = 0.0L;
  for (double v : a.values()) s += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(s));
}

inline double fro_diff(const Mat& a, const Mat& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a.data()[i]) - b.data()[i];
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s));
}

inline double trace(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

// Gauss-Jordan with full pivoting in long double.
inline Mat inverse(const Mat& a) {
  const std::size_t n = a.rows();
  std::vector<long double> w(n * 2 * n, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) w[i * 2 * n + j] = a(i, j);
    w[i * 2 * n + n + i] = 1.0L;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(w[r * 2 * n + c]) > std::fabs(w[piv * 2 * n + c])) piv = r;
    if (w[piv * 2 * n + c] == 0.0L) throw std::runtime_error("oracle::inverse: singular");
    for (std::size_t j = 0; j < 2 * n; ++j) std::swap(w[c * 2 * n + j], w[piv * 2 * n + j]);
    const long double d = w[c * 2 * n + c];
    for (std::size_t j = 0; j < 2 * n; ++j) w[c * 2 * n + j] /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const long double f = w[r * 2 * n + c];
      if (f == 0.0L) continue;
      for (std::size_t j = 0; j < 2 * n; ++j) w[r * 2 * n + j] -= f * w[c * 2 * n + j];
    }
  }
  Mat inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = static_cast<double>(w[i * 2 * n + n + j]);
  return inv;
}

inline Mat power(const Mat& r, unsigned k) {
  Mat p = identity(r.rows());
  for (unsigned i = 0; i < k; ++i) p = matmul(p, r);
  return p;
}

// Dense polynomial algebra in one variable; c[i] multiplies x^i.
using Poly = std::vector<double>;

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

inline Poly poly_add(Poly a, const Poly& b) {
  if (b.size() > a.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

inline double poly_eval(const Poly& c, double x) {
  double s = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) s = s * x + c[i];
  return s;
}

// Dense grid search for the minimum of a polynomial on [lo, hi]; returns the argmin.
inline double grid_argmin(const Poly& c, double lo, double hi, std::size_t points) {
  double best_x = lo;
  double best = poly_eval(c, lo);
  for (std::size_t i = 1; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    const double v = poly_eval(c, x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

inline double grid_min(const Poly& c, double lo, double hi, std::size_t points) {
  return poly_eval(c, grid_argmin(c, lo, hi, points));
}

// Symmetric eigenvalues by classical Jacobi in long double; independent of the library's
// cyclic implementation. Returns descending eigenvalues.
inline std::vector<double> sym_eigenvalues(const Mat& a_in) {
  const std::size_t n = a_in.rows();
  std::vector<long double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = 0.5L * (a_in(i, j) + a_in(j, i));
  for (int sweep = 0; sweep < 200; ++sweep) {
    long double off = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
    if (off < 1e-36L) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const long double apq = a[p * n + q];
        if (apq == 0.0L) continue;
        const long double theta = (a[q * n + q] - a[p * n + p]) / (2.0L * apq);
        const long double t = (theta >= 0 ? 1.0L : -1.0L) /
                              (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
        const long double c = 1.0L / std::sqrt(t * t + 1.0L);
        const long double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const long double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const long double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = static_cast<double>(a[i * n + i]);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

inline double rel_err(double got, double want) {
  const double scale = std::max(std::fabs(want), 1e-300);
  return std::fabs(got - want) / scale;
}

}  // namespace oracle
