#include "prism/polyfit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "prism/error.hpp"
#include "prism/gemm.hpp"

namespace prism {

namespace {

using Poly = std::vector<double>;

unsigned root_order(SurrogateFamily family, unsigned p) {
  switch (family) {
    case SurrogateFamily::InvSqrtResidual: return 2;
    case SurrogateFamily::InvPRootResidual: return p;
    case SurrogateFamily::InverseResidual: return 1;
  }
  return 2;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

double horner(const Poly& c, double x) {
  double s = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) s = s * x + c[i];
  return s;
}

double max_abs(const Poly& c, std::size_t from = 0) {
  double m = 0.0;
  for (std::size_t i = from; i < c.size(); ++i) m = std::max(m, std::fabs(c[i]));
  return m;
}

bool is_flat(const QuarticLoss& loss) {
  const double all = max_abs(loss.coeffs);
  return all == 0.0 || max_abs(loss.coeffs, 1) <= 1e-14 * all;
}

// Picks the lowest loss; candidates are visited in ascending order so ties keep the
// smallest alpha.
double best_candidate(const QuarticLoss& loss, std::vector<double> candidates) {
  std::sort(candidates.begin(), candidates.end());
  double best_alpha = candidates.front();
  double best = loss(best_alpha);
  for (double a : candidates) {
    const double v = loss(a);
    if (v < best) {
      best = v;
      best_alpha = a;
    }
  }
  return best_alpha;
}

double polish_cubic_root(double x, double c0, double c1, double c2, double c3) {
  for (int it = 0; it < 3; ++it) {
    const double f = ((c3 * x + c2) * x + c1) * x + c0;
    const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
    if (df == 0.0) break;
    const double next = x - f / df;
    const double fn = ((c3 * next + c2) * next + c1) * next + c0;
    if (!(std::fabs(fn) < std::fabs(f))) break;
    x = next;
  }
  return x;
}

std::vector<double> quadratic_roots(double c0, double c1, double c2, double scale) {
  if (std::fabs(c2) <= 1e-14 * scale) {
    if (std::fabs(c1) <= 1e-14 * scale) return {};
    return {-c0 / c1};
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  const double ref = c1 * c1 + std::fabs(4.0 * c2 * c0);
  if (disc < 0.0) {
    if (disc < -1e-12 * ref) return {};
    return {-c1 / (2.0 * c2)};
  }
  const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  if (q == 0.0) return {0.0};
  return {q / c2, c0 / q};
}

}  // namespace

double taylor_coefficient(SurrogateFamily family, unsigned j, unsigned p) {
  const unsigned q = root_order(family, p);
  if (q == 0) throw ConfigError("taylor_coefficient: root order must be positive");
  double a = 1.0;
  for (unsigned i = 1; i <= j; ++i) a *= (1.0 / q + i - 1.0) / i;
  return a;
}

SurrogatePolynomial taylor_surrogate(SurrogateFamily family, unsigned degree, unsigned p) {
  if (degree == 0) throw ConfigError("taylor_surrogate: degree must be >= 1");
  if (family == SurrogateFamily::InvPRootResidual && p == 0)
    throw ConfigError("taylor_surrogate: root order p must be >= 1");
  SurrogatePolynomial g;
  g.family = family;
  g.degree = degree;
  g.p = family == SurrogateFamily::InvPRootResidual ? p : root_order(family, p);
  g.base_coeffs.resize(degree);
  for (unsigned j = 0; j < degree; ++j) g.base_coeffs[j] = taylor_coefficient(family, j, p);
  return g;
}

double SurrogatePolynomial::taylor_alpha() const {
  return taylor_coefficient(family, degree, p);
}

std::vector<double> SurrogatePolynomial::coefficients(double alpha) const {
  std::vector<double> c = base_coeffs;
  c.push_back(alpha);
  return c;
}

Mat eval_surrogate_matrix(const SurrogatePolynomial& g, double alpha, const Mat& r) {
  if (!r.is_square() || r.empty()) throw ShapeError("eval_surrogate_matrix: R is not square");
  const auto c = g.coefficients(alpha);
  const std::size_t d = g.degree;
  Mat acc = c[d] * r;
  add_to_diagonal(acc, c[d - 1]);
  for (std::size_t j = d - 1; j-- > 0;) {
    acc = mat_mul(acc, r);
    add_to_diagonal(acc, c[j]);
  }
  return acc;
}

double eval_residual_map(double x, double alpha) {
  const double g = 1.0 + alpha * x;
  return 1.0 - (1.0 - x) * g * g;
}

double eval_residual_map(const SurrogatePolynomial& g, double x, double alpha) {
  const double gx = horner(g.coefficients(alpha), x);
  return 1.0 - (1.0 - x) * std::pow(gx, static_cast<double>(root_order(g.family, g.p)));
}

AlphaInterval::AlphaInterval(double lo, double hi) : lower(lo), upper(hi) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ConfigError("alpha interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "] is empty or not finite");
  }
}

double AlphaInterval::clamp(double alpha) const noexcept {
  return std::clamp(alpha, lower, upper);
}

AlphaInterval default_ns_interval(unsigned degree) {
  if (degree == 1) return {0.5, 1.0};
  if (degree == 2) return {0.375, 1.45};
  throw ConfigError("no default alpha interval for degree " + std::to_string(degree) +
                    "; pass one explicitly");
}

AlphaInterval wide_interval() { return {-1e6, 1e6}; }

AlphaInterval default_inverse_newton_interval(unsigned p) {
  if (p == 0) throw ConfigError("inverse Newton: p must be >= 1");
  return {0.5 / p, 2.0 / p};
}

double QuarticLoss::operator()(double alpha) const noexcept { return horner(coeffs, alpha); }

double QuarticLoss::derivative(double alpha) const noexcept {
  double s = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;) s = s * alpha + static_cast<double>(i) * coeffs[i];
  return s;
}

std::vector<double> residual_loss_coeffs(const TraceTable& traces,
                                         const std::vector<std::vector<double>>& q) {
  std::size_t xi_deg = 0;
  for (const auto& qj : q) xi_deg = std::max(xi_deg, qj.empty() ? 0 : qj.size() - 1);
  (void)traces.at(2 * xi_deg);  // fail early with MissingPowerError

  std::vector<double> m(2 * q.size() - 1, 0.0);
  for (std::size_t j = 0; j < q.size(); ++j)
    for (std::size_t l = 0; l < q.size(); ++l)
      for (std::size_t a = 0; a < q[j].size(); ++a) {
        if (q[j][a] == 0.0) continue;
        for (std::size_t b = 0; b < q[l].size(); ++b) m[j + l] += q[j][a] * q[l][b] * traces.t[a + b];
      }
  return m;
}

QuarticLoss ns_loss_coeffs(const TraceTable& traces, unsigned degree) {
  const auto t = [&](std::size_t i) { return traces.at(i); };
  if (degree == 1) {
    (void)t(6);
    QuarticLoss loss{{t(2), 4 * t(3) - 4 * t(2), 6 * t(4) - 10 * t(3) + 4 * t(2),
                      4 * t(5) - 8 * t(4) + 4 * t(3), t(6) - 2 * t(5) + t(4)},
                     default_ns_interval(1), 0.5};
    return loss;
  }
  if (degree == 2) {
    (void)t(10);
    QuarticLoss loss{{9.0 / 16 * t(4) + 3.0 / 8 * t(5) + 1.0 / 16 * t(6),
                      0.5 * t(7) + 2 * t(6) + 0.5 * t(5) - 3 * t(4),
                      1.5 * t(8) + 3 * t(7) - 4.5 * t(6) - 4 * t(5) + 4 * t(4),
                      2 * t(9) - 6 * t(7) + 4 * t(6), t(10) - 2 * t(9) + t(8)},
                     default_ns_interval(2), 0.375};
    return loss;
  }
  throw ConfigError("ns_loss_coeffs: closed form exists for degrees 1 and 2 only; use the "
                    "surrogate overload for degree " + std::to_string(degree));
}

QuarticLoss ns_loss_coeffs(const TraceTable& traces, const SurrogatePolynomial& g,
                           AlphaInterval interval) {
  // P(xi; alpha) = 1 - (1 - xi) (f + alpha xi^d)^q expanded in powers of alpha.
  const unsigned q = root_order(g.family, g.p);
  const std::size_t d = g.degree;
  const Poly f = g.base_coeffs;
  Poly mono(d + 1, 0.0);
  mono[d] = 1.0;

  // (f + alpha mono)^q = sum_j C(q,j) alpha^j mono^j f^{q-j}
  std::vector<Poly> f_pow{{1.0}}, m_pow{{1.0}};
  for (unsigned i = 1; i <= q; ++i) {
    f_pow.push_back(poly_mul(f_pow.back(), f));
    m_pow.push_back(poly_mul(m_pow.back(), mono));
  }
  const Poly one_minus_xi{1.0, -1.0};
  std::vector<Poly> qs(q + 1);
  double binom = 1.0;
  for (unsigned j = 0; j <= q; ++j) {
    if (j > 0) binom = binom * (q - j + 1) / j;
    Poly term = poly_mul(one_minus_xi, poly_mul(m_pow[j], f_pow[q - j]));
    for (double& c : term) c *= -binom;
    if (j == 0) term[0] += 1.0;
    qs[j] = std::move(term);
  }
  return {residual_loss_coeffs(traces, qs), interval, interval.clamp(g.taylor_alpha())};
}

QuarticLoss inverse_newton_loss_coeffs(const TraceTable& traces, unsigned p) {
  const AlphaInterval interval = default_inverse_newton_interval(p);
  std::vector<Poly> qs(p + 1, Poly(p + 2, 0.0));
  qs[0][1] = 1.0;
  double binom = 1.0;
  for (unsigned i = 1; i <= p; ++i) {
    binom = binom * (p - i + 1) / i;
    qs[i][i] = -binom;
    qs[i][i + 1] = binom;
  }
  return {residual_loss_coeffs(traces, qs), interval, 1.0 / p};
}

std::vector<double> real_cubic_roots(double c0, double c1, double c2, double c3) {
  const double scale = std::max({std::fabs(c0), std::fabs(c1), std::fabs(c2), std::fabs(c3)});
  if (scale == 0.0) return {};
  if (std::fabs(c3) <= 1e-14 * scale) return quadratic_roots(c0, c1, c2, scale);

  const double b = c2 / c3, c = c1 / c3, d = c0 / c3;
  const double shift = b / 3.0;
  const double P = c - b * b / 3.0;
  const double Q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double half_q = 0.5 * Q;
  const double third_p = P / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;
  const double ref = half_q * half_q + std::fabs(third_p * third_p * third_p);

  std::vector<double> t;
  if (ref == 0.0) {
    t = {0.0};
  } else if (std::fabs(disc) <= 1e-12 * ref) {
    const double u = std::cbrt(-half_q);
    t = {2.0 * u, -u};
  } else if (disc > 0.0) {
    const double s = std::sqrt(disc);
    t = {std::cbrt(-half_q + s) + std::cbrt(-half_q - s)};
  } else {
    const double rho = 2.0 * std::sqrt(-third_p);
    const double arg = std::clamp(3.0 * Q / (2.0 * P) * std::sqrt(-3.0 / P), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) t.push_back(rho * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0));
  }
  std::vector<double> roots;
  for (double ti : t) roots.push_back(polish_cubic_root(ti - shift, c0, c1, c2, c3));
  return roots;
}

double minimize_quartic_on_interval(const QuarticLoss& loss) {
  if (loss.coeffs.size() > 5) throw ConfigError("minimize_quartic_on_interval: degree exceeds 4");
  const AlphaInterval& iv = loss.interval;
  if (iv.lower == iv.upper) return iv.lower;
  if (is_flat(loss)) return iv.clamp(loss.fallback);

  double c[5] = {0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < loss.coeffs.size(); ++i) c[i] = loss.coeffs[i];
  std::vector<double> candidates{iv.lower, iv.upper};
  for (double r : real_cubic_roots(c[1], 2.0 * c[2], 3.0 * c[3], 4.0 * c[4]))
    if (std::isfinite(r) && iv.contains(r)) candidates.push_back(r);
  return best_candidate(loss, std::move(candidates));
}

double minimize_poly_on_interval(const QuarticLoss& loss) {
  if (loss.coeffs.size() <= 5) return minimize_quartic_on_interval(loss);
  const AlphaInterval& iv = loss.interval;
  if (iv.lower == iv.upper) return iv.lower;
  if (is_flat(loss)) return iv.clamp(loss.fallback);

  constexpr int kSamples = 129;
  std::vector<double> xs(kSamples), vals(kSamples), ders(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    xs[i] = iv.lower + (iv.upper - iv.lower) * i / (kSamples - 1.0);
    vals[i] = loss(xs[i]);
    ders[i] = loss.derivative(xs[i]);
  }
  std::vector<double> candidates{iv.lower, iv.upper};
  for (int i = 0; i + 1 < kSamples; ++i) {
    if (ders[i] == 0.0) candidates.push_back(xs[i]);
    if (!(ders[i] * ders[i + 1] < 0.0)) continue;
    double lo = xs[i], hi = xs[i + 1];
    double dlo = ders[i];
    for (int it = 0; it < 200 && hi - lo > 1e-16 * (std::fabs(lo) + 1.0); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double dm = loss.derivative(mid);
      if (dm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((dm < 0.0) == (dlo < 0.0)) {
        lo = mid;
        dlo = dm;
      } else {
        hi = mid;
      }
    }
    candidates.push_back(0.5 * (lo + hi));
  }

  // Golden-section search around the best sample catches minima the sign scan can miss
  // (a double root of m' has no sign change).
  const int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  double a = xs[std::max(best - 1, 0)], b = xs[std::min(best + 1, kSamples - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = loss(x1), f2 = loss(x2);
  for (int it = 0; it < 100 && b - a > 1e-15 * (std::fabs(a) + 1.0); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = loss(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = loss(x2);
    }
  }
  candidates.push_back(0.5 * (a + b));
  return best_candidate(loss, std::move(candidates));
}

QuarticLoss db_loss_coeffs(const Mat& m, const Mat& m_inv) {
  if (!m.is_square() || m.empty() || m_inv.rows() != m.rows() || m_inv.cols() != m.cols())
    throw ShapeError("db_loss_coeffs: M and M^{-1} must be square of equal size");
  // I - M' = (1 - 2a) R + a^2 C with R = I - M and C = 2I - M - M^{-1}. Expanding the
  // trace formulas around I this way keeps the coefficients accurate as M -> I, where the
  // raw sums tr(I), tr(M), tr(M^2), ... cancel to roundoff.
  const std::size_t n = m.rows();
  double rr = 0.0, rc = 0.0, cc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double id = i == j ? 1.0 : 0.0;
      const double r = id - m(i, j);
      const double c = 2.0 * id - m(i, j) - m_inv(i, j);
      rr += r * r;
      rc += r * c;
      cc += c * c;
    }
  return {{rr, -4.0 * rr, 4.0 * rr + 2.0 * rc, -4.0 * rc, cc}, wide_interval(), 0.5};
}

QuarticLoss chebyshev_loss_coeffs(const TraceTable& traces, AlphaInterval interval) {
  const double t4 = traces.at(4), t5 = traces.at(5), t6 = traces.at(6);
  return {{t4, -2 * t4 + 2 * t5, t4 - 2 * t5 + t6}, interval, 1.0};
}

double chebyshev_alpha(const TraceTable& traces) { return chebyshev_alpha(traces, {0.5, 2.0}); }

double chebyshev_alpha(const TraceTable& traces, AlphaInterval interval) {
  const QuarticLoss loss = chebyshev_loss_coeffs(traces, interval);
  const double scale = max_abs({traces.at(4), traces.at(5), traces.at(6)});
  const double c1 = loss.coeffs[1], c2 = loss.coeffs[2];
  if (scale == 0.0 || c2 <= 1e-14 * scale) return interval.clamp(1.0);
  return interval.clamp(-c1 / (2.0 * c2));
}

}  // namespace prism
