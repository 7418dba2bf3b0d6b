#include "prism/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "prism/error.hpp"
#include "prism/gemm.hpp"
#include "prism/rng.hpp"

namespace prism {

namespace {

void require_square(const Mat& a, const char* op) {
  if (a.empty() || !a.is_square()) throw ShapeError(std::string(op) + ": matrix is not square");
}

void require_symmetric(const Mat& a, const char* op) {
  require_square(a, op);
  if (!is_symmetric(a)) {
    throw SymmetryError(std::string(op) + ": input is not symmetric (relative asymmetry " +
                        std::to_string(asymmetry(a)) + ")");
  }
}

std::vector<std::size_t> descending_order(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] > values[j]; });
  return idx;
}

void rotate_rows(Mat& m, std::size_t p, std::size_t q, double c, double s) {
  double* rp = m.row(p).data();
  double* rq = m.row(q).data();
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const double x = rp[j];
    const double y = rq[j];
    rp[j] = c * x - s * y;
    rq[j] = s * x + c * y;
  }
}

double row_dot(const Mat& m, std::size_t p, std::size_t q) {
  const double* rp = m.row(p).data();
  const double* rq = m.row(q).data();
  double s = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) s += rp[j] * rq[j];
  return s;
}

Mat lu_inverse(const Mat& a, double tol) {
  const std::size_t n = a.rows();
  Mat work = a;
  Mat inv = Mat::identity(n);
  const double scale = frob_norm(a);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(work(r, col)) > std::abs(work(piv, col))) piv = r;
    if (std::abs(work(piv, col)) <= tol * scale) {
      throw SingularityError("matrix is singular to working tolerance (pivot " +
                             std::to_string(col) + ")");
    }
    if (piv != col) {
      std::swap_ranges(work.row(col).begin(), work.row(col).end(), work.row(piv).begin());
      std::swap_ranges(inv.row(col).begin(), inv.row(col).end(), inv.row(piv).begin());
    }
    const double d = 1.0 / work(col, col);
    for (double& v : work.row(col)) v *= d;
    for (double& v : inv.row(col)) v *= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = work(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        work(r, j) -= f * work(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

}  // namespace

double spectral_norm_estimate(const Mat& a, std::size_t iters, std::uint64_t seed) {
  if (iters == 0) throw ConfigError("spectral_norm_estimate: iters must be >= 1");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  CounterRng rng(seed, streams::kPowerIteration);
  std::vector<double> v(n), av(m), w(n);
  rng.fill_normal(v);
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double e : x) s += e * e;
    s = std::sqrt(s);
    if (s > 0.0)
      for (double& e : x) e /= s;
    return s;
  };
  normalize(v);
  double estimate = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a(i, j) * v[j];
      av[i] = s;
    }
    double nrm = 0.0;
    for (double e : av) nrm += e * e;
    estimate = std::sqrt(nrm);
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) w[j] += a(i, j) * av[i];
    if (normalize(w) == 0.0) return estimate;
    v.swap(w);
  }
  return estimate;
}

QrFactors householder_qr(const Mat& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw ShapeError("householder_qr: requires rows >= cols");
  Mat work = a;
  std::vector<std::vector<double>> reflectors(n);
  std::vector<double> betas(n, 0.0);

  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(m - k);
    double norm_sq = 0.0;
    for (std::size_t i = k; i < m; ++i) {
      v[i - k] = work(i, k);
      norm_sq += v[i - k] * v[i - k];
    }
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) {
      reflectors[k] = std::move(v);
      continue;
    }
    const double alpha = v[0] >= 0.0 ? -norm : norm;
    v[0] -= alpha;
    const double vnorm_sq = norm_sq - work(k, k) * work(k, k) + v[0] * v[0];
    const double beta = vnorm_sq > 0.0 ? 2.0 / vnorm_sq : 0.0;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i - k] * work(i, j);
      s *= beta;
      for (std::size_t i = k; i < m; ++i) work(i, j) -= s * v[i - k];
    }
    reflectors[k] = std::move(v);
    betas[k] = beta;
  }

  Mat q(m, n);
  for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    const auto& v = reflectors[kk];
    const double beta = betas[kk];
    if (beta == 0.0) continue;
    for (std::size_t j = kk; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = kk; i < m; ++i) s += v[i - kk] * q(i, j);
      s *= beta;
      for (std::size_t i = kk; i < m; ++i) q(i, j) -= s * v[i - kk];
    }
  }

  Mat r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) r(i, j) = work(i, j);
  // Flip signs so diag(r) >= 0.
  for (std::size_t i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) {
      for (std::size_t j = i; j < n; ++j) r(i, j) = -r(i, j);
      for (std::size_t row = 0; row < m; ++row) q(row, i) = -q(row, i);
    }
  }
  return {std::move(q), std::move(r)};
}

Mat cholesky_spd_inverse(const Mat& a_in) {
  require_symmetric(a_in, "cholesky_spd_inverse");
  const Mat a = symmetrize(a_in);
  const std::size_t n = a.rows();
  Mat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw DefinitenessError("matrix is not positive definite: pivot " + std::to_string(j) +
                                  " is " + std::to_string(d),
                              j);
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      const double* li = l.row(i).data();
      const double* lj = l.row(j).data();
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      l(i, j) = s / ljj;
    }
  }
  // L^{-1} by forward substitution, column by column of the identity.
  Mat linv(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    linv(col, col) = 1.0 / l(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = col; k < i; ++k) s += l(i, k) * linv(k, col);
      linv(i, col) = -s / l(i, i);
    }
  }
  return symmetrize(mat_mul_tn(linv, linv));
}

Spectrum jacobi_eigendecomposition(const Mat& a_in, double tol) {
  require_symmetric(a_in, "jacobi_eigendecomposition");
  Mat a = symmetrize(a_in);
  const std::size_t n = a.rows();
  Mat vt = Mat::identity(n);  // row i holds eigenvector i
  const double target = tol * frob_norm(a);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= target) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        double* rowp = a.row(p).data();
        double* rowq = a.row(q).data();
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = rowp[r];
          const double arq = rowq[r];
          const double np = c * arp - s * arq;
          const double nq = s * arp + c * arq;
          rowp[r] = np;
          rowq[r] = nq;
          a(r, p) = np;
          a(r, q) = nq;
        }
        rotate_rows(vt, p, q, c, s);
      }
    }
  }

  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  const auto order = descending_order(diag);
  Spectrum out;
  out.values.resize(n);
  Mat vectors(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = diag[order[i]];
    for (std::size_t r = 0; r < n; ++r) vectors(r, i) = vt(order[i], r);
  }
  out.vectors = std::move(vectors);
  return out;
}

SvdFactors reference_svd(const Mat& a, double tol) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw ShapeError("reference_svd: requires rows >= cols");

  const Spectrum eig = jacobi_eigendecomposition(gram(a), tol);
  // Work on transposes so column rotations become contiguous row rotations.
  Mat bt = transpose(mat_mul(a, *eig.vectors));  // n x m
  Mat vt = transpose(*eig.vectors);               // n x n

  constexpr double kOrthTol = 1e-15;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = row_dot(bt, p, p);
        const double beta = row_dot(bt, q, q);
        const double gamma = row_dot(bt, p, q);
        if (gamma == 0.0 || std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t =
            (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate_rows(bt, p, q, c, s);
        rotate_rows(vt, p, q, c, s);
        rotated = true;
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sv(n);
  for (std::size_t i = 0; i < n; ++i) sv[i] = std::sqrt(row_dot(bt, i, i));
  const auto order = descending_order(sv);
  const double smax = sv[order[0]];

  SvdFactors out{Mat(m, n), Spectrum{}, Mat(n, n)};
  out.s.values.resize(n);
  std::size_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order[i];
    out.s.values[i] = sv[src];
    for (std::size_t r = 0; r < n; ++r) out.v(r, i) = vt(src, r);
    if (sv[src] > tol * smax && sv[src] > 0.0) {
      for (std::size_t r = 0; r < m; ++r) out.u(r, i) = bt(src, r) / sv[src];
      ++rank;
    }
  }
  if (rank < n) {
    Mat basis = out.u;
    CounterRng rng(0x5eedULL, streams::kSpectrum);
    for (std::size_t i = rank; i < n; ++i)
      for (std::size_t r = 0; r < m; ++r) basis(r, i) = rng.normal();
    const QrFactors qr = householder_qr(basis);
    for (std::size_t i = rank; i < n; ++i)
      for (std::size_t r = 0; r < m; ++r) out.u(r, i) = qr.q(r, i);
  }
  return out;
}

Mat reference_polar(const Mat& a, double tol) {
  const SvdFactors svd = reference_svd(a, tol);
  return mat_mul(svd.u, transpose(svd.v));
}

Mat reference_matrix_function(const Mat& a, FunctionKind kind, double tol) {
  require_square(a, "reference_matrix_function");
  if (kind.function == MatrixFunction::Inverse) return lu_inverse(a, tol);
  if (kind.function == MatrixFunction::InvPRoot && kind.p == 0) {
    throw ConfigError("reference_matrix_function: p must be >= 1");
  }

  const Spectrum eig = jacobi_eigendecomposition(a, 1e-15);
  const std::size_t n = a.rows();
  const double norm2 =
      std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  const double floor = tol * norm2;

  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = eig.values[i];
    switch (kind.function) {
      case MatrixFunction::Sign:
        if (std::abs(lam) <= floor) {
          throw SingularityError("sign: eigenvalue " + std::to_string(lam) + " is numerically zero");
        }
        f[i] = lam > 0.0 ? 1.0 : -1.0;
        break;
      case MatrixFunction::Sqrt:
        if (lam < -floor) {
          throw DefinitenessError("sqrt: negative eigenvalue " + std::to_string(lam), i);
        }
        f[i] = std::sqrt(std::max(lam, 0.0));
        break;
      case MatrixFunction::InvSqrt:
      case MatrixFunction::InvPRoot: {
        if (lam <= floor) {
          throw SingularityError("inverse root: eigenvalue " + std::to_string(lam) +
                                 " is not safely positive");
        }
        const double p = kind.function == MatrixFunction::InvSqrt ? 2.0 : double(kind.p);
        f[i] = std::pow(lam, -1.0 / p);
        break;
      }
      case MatrixFunction::Inverse:
        break;
    }
  }

  const Mat& v = *eig.vectors;
  Mat scaled = v;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) scaled(r, c) *= f[c];
  return symmetrize(mat_mul(scaled, transpose(v)));
}

}  // namespace prism
