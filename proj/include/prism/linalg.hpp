#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "prism/mat.hpp"

namespace prism {

/// Eigenvalues (descending) or singular values (non-negative, descending), with
/// optional orthonormal vectors stored as the columns of `vectors`.
struct Spectrum {
  std::vector<double> values;
  std::optional<Mat> vectors;
};

// Power iteration on a^T a; returns ||a v|| for the final unit iterate v, which never
// exceeds ||a||_2 (up to roundoff).
double spectral_norm_estimate(const Mat& a, std::size_t iters, std::uint64_t seed);

struct QrFactors {
  Mat q;  // rows x cols, orthonormal columns
  Mat r;  // cols x cols, upper triangular with non-negative diagonal
};

// Thin Householder QR. Requires rows >= cols.
QrFactors householder_qr(const Mat& a);

// Inverse of a symmetric positive definite matrix through its Cholesky factor.
// Throws SymmetryError / DefinitenessError (carrying the failing pivot index).
Mat cholesky_spd_inverse(const Mat& a);

// Cyclic Jacobi eigendecomposition of a symmetric matrix (re-symmetrized first).
// Rotates until the off-diagonal Frobenius mass is <= tol * ||a||_F.
Spectrum jacobi_eigendecomposition(const Mat& a, double tol = 1e-14);

struct SvdFactors {
  Mat u;       // rows x cols
  Spectrum s;  // singular values, descending (vectors unset)
  Mat v;       // cols x cols
};

// Reference SVD for rows >= cols: right vectors from the Jacobi eigendecomposition of
// a^T a, then one-sided Jacobi sweeps on a*V so small singular values keep their
// relative accuracy. Columns of u for singular values <= tol * s_max are completed by QR.
SvdFactors reference_svd(const Mat& a, double tol = 1e-14);

// Polar factor U V^T of a (rows >= cols) from reference_svd.
Mat reference_polar(const Mat& a, double tol = 1e-14);

enum class MatrixFunction { Sign, Sqrt, InvSqrt, InvPRoot, Inverse };

struct FunctionKind {
  MatrixFunction function;
  unsigned p = 1;  // only read for InvPRoot
};

// Ground-truth matrix functions. Sign/Sqrt/InvSqrt/InvPRoot go through the Jacobi
// eigendecomposition of a symmetric input; Inverse uses Gaussian elimination with partial
// pivoting and accepts general square matrices.
// Throws SingularityError when an eigenvalue (or pivot) is <= tol * ||a||_2 for the
// inverse kinds, DefinitenessError for negative eigenvalues under Sqrt.
Mat reference_matrix_function(const Mat& a, FunctionKind kind, double tol = 1e-12);

}  // namespace prism
