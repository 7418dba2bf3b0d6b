#pragma once

#include <cstddef>
#include <vector>

#include "prism/mat.hpp"
#include "prism/sketch.hpp"

namespace prism {

// Which scalar function's Taylor series at xi = 0 supplies the fixed low-order part of
// the surrogate g_d(xi; alpha) = sum_{j<d} a_j xi^j + alpha xi^d.
enum class SurrogateFamily {
  InvSqrtResidual,   // (1 - xi)^{-1/2}: sign, square root, polar
  InvPRootResidual,  // (1 - xi)^{-1/p}
  InverseResidual,   // (1 - xi)^{-1}
};

struct SurrogatePolynomial {
  SurrogateFamily family = SurrogateFamily::InvSqrtResidual;
  unsigned degree = 1;
  unsigned p = 2;                    // root order; only used by InvPRootResidual
  std::vector<double> base_coeffs;   // a_0 .. a_{d-1}

  // a_d, the coefficient alpha replaces in the truncated series.
  double taylor_alpha() const;
  // Coefficients of g(.; alpha) in ascending powers, length degree + 1.
  std::vector<double> coefficients(double alpha) const;
};

// j-th Taylor coefficient of the family's generating function.
double taylor_coefficient(SurrogateFamily family, unsigned j, unsigned p = 2);

// Throws ConfigError for degree 0 or p == 0.
SurrogatePolynomial taylor_surrogate(SurrogateFamily family, unsigned degree, unsigned p = 2);

// g(R; alpha) by Horner's rule: degree - 1 matrix products.
Mat eval_surrogate_matrix(const SurrogatePolynomial& g, double alpha, const Mat& r);

// Scalar residual map of the degree-1 Newton-Schulz family: 1 - (1 - x)(1 + alpha x)^2.
double eval_residual_map(double x, double alpha);
// General scalar map 1 - (1 - x) g(x; alpha)^q, q the family's root order (2, p or 1).
double eval_residual_map(const SurrogatePolynomial& g, double x, double alpha);

struct AlphaInterval {
  double lower;
  double upper;

  AlphaInterval(double lo, double hi);
  bool contains(double alpha) const noexcept { return alpha >= lower && alpha <= upper; }
  double clamp(double alpha) const noexcept;
};

// [1/2, 1] for degree 1 and [3/8, 29/20] for degree 2. Other degrees throw ConfigError.
AlphaInterval default_ns_interval(unsigned degree);
// Unconstrained search range used by the DB Newton variant and the unconstrained test mode.
AlphaInterval wide_interval();

/// Loss polynomial m(alpha) = sum_i coeffs[i] alpha^i over a search interval.
/// Quartic for the Newton-Schulz and DB families; degree 2p for inverse Newton.
/// `fallback` is returned (clamped) when the loss is numerically constant in alpha.
struct QuarticLoss {
  std::vector<double> coeffs;
  AlphaInterval interval{0.0, 0.0};
  double fallback = 0.0;

  std::size_t degree() const noexcept { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  double operator()(double alpha) const noexcept;
  double derivative(double alpha) const noexcept;
};

// Newton-Schulz family loss tr(S P(R)^2 S^T) (or tr(P(R)^2) for exact traces), where
// I - P(R) = (I - R) g(R; alpha)^2. Degrees 1 and 2 use closed forms. The surrogate overload
// expands (I - R) g^q generically for any degree and family. Needs traces up to power
// 4d + 2 for q = 2 (MissingPowerError).
QuarticLoss ns_loss_coeffs(const TraceTable& traces, unsigned degree);
QuarticLoss ns_loss_coeffs(const TraceTable& traces, const SurrogatePolynomial& g,
                           AlphaInterval interval);

// Loss for a residual map written as P(xi; alpha) = sum_j alpha^j Q_j(xi), with Q_j given
// by ascending coefficients in xi: m_s = sum_{j+l=s} sum_{a,b} Q_j[a] Q_l[b] t_{a+b}.
std::vector<double> residual_loss_coeffs(const TraceTable& traces,
                                         const std::vector<std::vector<double>>& q);

// Loss for the inverse p-th root step M <- (I + alpha R)^p M with residual I - M:
// R - sum_{i=1}^p C(p,i) alpha^i (R^i - R^{i+1}), degree 2p in alpha. Traces up to 2p + 2.
QuarticLoss inverse_newton_loss_coeffs(const TraceTable& traces, unsigned p);
// [1/(2p), 2/p]
AlphaInterval default_inverse_newton_interval(unsigned p);

// Global minimizer of a quartic on its interval: critical points from the closed-form
// cubic, plus the endpoints; ties go to the smallest alpha.
double minimize_quartic_on_interval(const QuarticLoss& loss);
// Any degree: quartics delegate to the closed form; otherwise a 129-point scan, bisection
// on sign changes of m', and golden-section refinement around the best sample.
double minimize_poly_on_interval(const QuarticLoss& loss);

// Real roots of c0 + c1 x + c2 x^2 + c3 x^3, degrading to lower degree when leading
// coefficients vanish relative to the rest. Empty for the zero polynomial.
std::vector<double> real_cubic_roots(double c0, double c1, double c2, double c3);

// Denman-Beavers product-form Newton step M' = 2a(1-a) I + (1-a)^2 M + a^2 M^{-1};
// loss ||I - M'||_F^2 over wide_interval() with fallback 1/2. Equal to the trace formulas
// c_1 = tr(-4I + 8M - 4M^2), ..., c_4 = tr(6I - 4M + M^2 - 4M^{-1} + M^{-2}), evaluated from
// entrywise sums without any matrix product.
QuarticLoss db_loss_coeffs(const Mat& m, const Mat& m_inv);

// Degree-2 Chebyshev inverse step X <- X (I + R + alpha R^2): residual (1 - alpha) R^2 + alpha R^3.
QuarticLoss chebyshev_loss_coeffs(const TraceTable& traces, AlphaInterval interval);
// argmin of the quadratic loss clamped to [1/2, 2] (or `interval`); 1 when it is flat.
double chebyshev_alpha(const TraceTable& traces);
double chebyshev_alpha(const TraceTable& traces, AlphaInterval interval);

}  // namespace prism
