#include "prism/iterations.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "prism/error.hpp"
#include "prism/gemm.hpp"
#include "prism/linalg.hpp"
#include "prism/rng.hpp"

namespace prism {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

constexpr int kDivergenceRun = 5;

void validate(const IterationOptions& opts, const CoefficientStrategy& strategy) {
  if (opts.max_iters == 0) throw ConfigError("max_iters must be >= 1");
  if (!(opts.tol_fro > 0.0)) throw ConfigError("tol_fro must be positive");
  if (const auto* fs = std::get_if<FixedSchedule>(&strategy)) {
    if (fs->alphas.empty() && fs->triples.empty())
      throw ConfigError("fixed schedule must contain at least one coefficient");
    if (!fs->alphas.empty() && !fs->triples.empty())
      throw ConfigError("fixed schedule holds either alphas or triples, not both");
  }
  if (const auto* ps = std::get_if<PrismSketched>(&strategy); ps && ps->p == 0)
    throw ConfigError("sketch rows p must be >= 1");
}

/// Owns the report while a solve runs: residual bookkeeping, stopping and divergence.
class Telemetry {
 public:
  Telemetry(const IterationOptions& opts, std::size_t n, std::optional<AlphaInterval> interval)
      : opts_(opts),
        threshold_(opts.tol_fro * std::sqrt(static_cast<double>(n))),
        start_(std::chrono::steady_clock::now()) {
    report_.interval = interval;
  }

  // Records R_k. Returns a termination when the loop must stop before stepping.
  std::optional<Termination> observe(std::size_t k, const Mat& r) {
    IterationRecord rec;
    rec.k = k;
    rec.residual_fro = frob_norm(r);
    const bool finite = std::isfinite(rec.residual_fro);
    if (opts_.spectral_estimate_iters > 0 && finite)
      rec.residual_spec = spectral_norm_estimate(r, opts_.spectral_estimate_iters,
                                                 derive_seed(k, streams::kPowerIteration));
    if (opts_.record_walltime)
      rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    report_.records.push_back(rec);

    if (!finite) return Termination::Diverged;
    if (rec.residual_fro <= threshold_) return Termination::Converged;
    if (report_.records.size() > 1) {
      const double prev = report_.records[report_.records.size() - 2].residual_fro;
      increases_ = rec.residual_fro > prev ? increases_ + 1 : 0;
      if (increases_ >= kDivergenceRun) return Termination::Diverged;
    }
    if (k >= opts_.max_iters) return Termination::MaxIters;
    return std::nullopt;
  }

  void set_alpha(double alpha) { report_.records.back().alpha = alpha; }

  ConvergenceReport finish(Termination t) {
    report_.termination = t;
    return std::move(report_);
  }

 private:
  const IterationOptions& opts_;
  double threshold_;
  std::chrono::steady_clock::time_point start_;
  ConvergenceReport report_;
  int increases_ = 0;
};

Mat identity_minus(const Mat& m) { return symmetrize(shifted_negative(m, 1.0)); }

TraceTable strategy_traces(const CoefficientStrategy& strategy, const Mat& r, std::size_t k,
                           std::size_t max_power) {
  if (const auto* ps = std::get_if<PrismSketched>(&strategy)) {
    const std::size_t p = std::min(ps->p, r.rows());
    return sketched_power_traces(r, gaussian_sketch(p, r.rows(), derive_seed(ps->seed, k)),
                                 max_power);
  }
  return exact_power_traces(r, max_power);
}

double schedule_alpha(const FixedSchedule& fs, std::size_t k) {
  return fs.triples.empty() ? fs.alphas[fs.index(k)] : fs.triples[fs.index(k)].c;
}

/// Coefficient selection and the g(R) update shared by sign, sqrt and polar.
struct NsFamily {
  SurrogatePolynomial g;
  AlphaInterval interval;

  NsFamily(const IterationOptions& opts)
      : g(taylor_surrogate(SurrogateFamily::InvSqrtResidual, opts.degree)),
        interval(opts.unconstrained ? wide_interval()
                 : opts.interval    ? *opts.interval
                                    : default_ns_interval(opts.degree)) {}

  double choose(const CoefficientStrategy& strategy, const Mat& r, std::size_t k) const {
    return std::visit(
        Overloaded{[&](const Taylor&) { return g.taylor_alpha(); },
                   [&](const FixedSchedule& fs) { return schedule_alpha(fs, k); },
                   [&](const auto&) {
                     const TraceTable t = strategy_traces(strategy, r, k, 4 * g.degree + 2);
                     QuarticLoss loss = g.degree <= 2 ? ns_loss_coeffs(t, g.degree)
                                                      : ns_loss_coeffs(t, g, interval);
                     loss.interval = interval;
                     return minimize_poly_on_interval(loss);
                   }},
        strategy);
  }

  // g(R; alpha), or a I + b R + c R^2 for coefficient-triple schedules.
  Mat factor(const CoefficientStrategy& strategy, const Mat& r, std::size_t k,
             double alpha) const {
    if (const auto* fs = std::get_if<FixedSchedule>(&strategy); fs && !fs->triples.empty()) {
      const CoefficientTriple& t = fs->triples[fs->index(k)];
      Mat f = t.c * mat_mul(r, r);
      axpy(t.b, r, f);
      add_to_diagonal(f, t.a);
      return f;
    }
    return eval_surrogate_matrix(g, alpha, r);
  }
};

std::optional<AlphaInterval> reported_interval(const CoefficientStrategy& s, AlphaInterval iv) {
  if (is_prism(s)) return iv;
  return std::nullopt;
}

void require_square(const Mat& a, const char* who) {
  if (a.empty() || !a.is_square())
    throw ShapeError(std::string(who) + ": input must be a non-empty square matrix, got " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

double input_scale(const Mat& a, bool normalize, const char* who) {
  const double f = frob_norm(a);
  if (!std::isfinite(f)) throw DegenerateInputError(std::string(who) + ": non-finite input");
  if (f == 0.0) throw DegenerateInputError(std::string(who) + ": input is the zero matrix");
  return normalize ? f : 1.0;
}

Mat symmetric_input(const Mat& a, const char* who) {
  if (!is_symmetric(a))
    throw SymmetryError(std::string(who) + ": input is not symmetric (relative asymmetry " +
                        std::to_string(asymmetry(a)) + ")");
  return symmetrize(a);
}

}  // namespace

std::size_t FixedSchedule::index(std::size_t k) const noexcept {
  const std::size_t len = length();
  if (len == 0) return 0;
  return cycle ? k % len : std::min(k, len - 1);
}

std::string strategy_name(const CoefficientStrategy& s) {
  return std::visit(Overloaded{[](const Taylor&) { return std::string("taylor"); },
                               [](const PrismExact&) { return std::string("prism-exact"); },
                               [](const PrismSketched& p) {
                                 return "prism-sketched:" + std::to_string(p.p) + ":" +
                                        std::to_string(p.seed);
                               },
                               [](const FixedSchedule& f) {
                                 return std::string(f.triples.empty() ? "fixed" : "fixed-triples");
                               }},
                    s);
}

bool is_prism(const CoefficientStrategy& s) noexcept {
  return std::holds_alternative<PrismExact>(s) || std::holds_alternative<PrismSketched>(s);
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIters: return "max_iters";
    case Termination::Diverged: return "diverged";
  }
  return "unknown";
}

std::optional<std::size_t> ConvergenceReport::iterations_to(double threshold) const {
  for (const auto& r : records)
    if (r.residual_fro <= threshold) return r.k;
  return std::nullopt;
}

IterationResult sign_iterate(const Mat& a, const CoefficientStrategy& strategy,
                             const IterationOptions& opts) {
  validate(opts, strategy);
  require_square(a, "sign_iterate");
  const double s = input_scale(a, opts.normalize_input, "sign_iterate");
  const Mat a2 = mat_mul(a, a);
  if (!is_symmetric(a2)) throw SymmetryError("sign_iterate: a^2 is not symmetric");

  const NsFamily ns(opts);
  Telemetry tel(opts, a.rows(), reported_interval(strategy, ns.interval));
  Mat x = (1.0 / s) * a;
  Termination done = Termination::MaxIters;
  for (std::size_t k = 0;; ++k) {
    const Mat r = identity_minus(k == 0 ? (1.0 / (s * s)) * a2 : mat_mul(x, x));
    if (auto stop = tel.observe(k, r)) {
      done = *stop;
      break;
    }
    const double alpha = ns.choose(strategy, r, k);
    tel.set_alpha(alpha);
    if (opts.on_step) opts.on_step(k, r, alpha);
    x = mat_mul(x, ns.factor(strategy, r, k, alpha));
  }
  return {std::move(x), std::nullopt, tel.finish(done)};
}

IterationResult sqrt_coupled_iterate(const Mat& a_in, const CoefficientStrategy& strategy,
                                     const IterationOptions& opts) {
  validate(opts, strategy);
  require_square(a_in, "sqrt_coupled_iterate");
  const Mat a = symmetric_input(a_in, "sqrt_coupled_iterate");
  const double s = input_scale(a, opts.normalize_input, "sqrt_coupled_iterate");
  if (opts.validate_input) {
    const auto ev = jacobi_eigendecomposition(a).values;
    if (ev.back() <= 0.0)
      throw DefinitenessError("sqrt_coupled_iterate: input has eigenvalue " +
                                  std::to_string(ev.back()),
                              ev.size() - 1);
  }

  const NsFamily ns(opts);
  Telemetry tel(opts, a.rows(), reported_interval(strategy, ns.interval));
  Mat x = (1.0 / s) * a;
  Mat y = Mat::identity(a.rows());
  Termination done = Termination::MaxIters;
  for (std::size_t k = 0;; ++k) {
    const Mat r = identity_minus(k == 0 ? x : mat_mul(x, y));
    if (auto stop = tel.observe(k, r)) {
      done = *stop;
      break;
    }
    const double alpha = ns.choose(strategy, r, k);
    tel.set_alpha(alpha);
    if (opts.on_step) opts.on_step(k, r, alpha);
    const Mat f = ns.factor(strategy, r, k, alpha);
    x = mat_mul(x, f);
    y = mat_mul(f, y);
  }
  const double root = std::sqrt(s);
  return {root * x, (1.0 / root) * y, tel.finish(done)};
}

IterationResult polar_iterate(const Mat& a, const CoefficientStrategy& strategy,
                              const IterationOptions& opts) {
  validate(opts, strategy);
  if (a.empty() || a.rows() < a.cols())
    throw ShapeError("polar_iterate: needs rows >= cols, got " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()));
  const double s = input_scale(a, opts.normalize_input, "polar_iterate");

  const NsFamily ns(opts);
  Telemetry tel(opts, a.cols(), reported_interval(strategy, ns.interval));
  Mat x = (1.0 / s) * a;
  Termination done = Termination::MaxIters;
  for (std::size_t k = 0;; ++k) {
    const Mat r = identity_minus(gram(x));
    if (auto stop = tel.observe(k, r)) {
      done = *stop;
      break;
    }
    const double alpha = ns.choose(strategy, r, k);
    tel.set_alpha(alpha);
    if (opts.on_step) opts.on_step(k, r, alpha);
    x = mat_mul(x, ns.factor(strategy, r, k, alpha));
  }
  return {std::move(x), std::nullopt, tel.finish(done)};
}

IterationResult inverse_proot_iterate(const Mat& a_in, unsigned p,
                                      const CoefficientStrategy& strategy,
                                      const IterationOptions& opts) {
  validate(opts, strategy);
  if (p == 0) throw ConfigError("inverse_proot_iterate: p must be >= 1");
  if (const auto* fs = std::get_if<FixedSchedule>(&strategy); fs && !fs->triples.empty())
    throw ConfigError("inverse_proot_iterate: coefficient triples are not supported");
  require_square(a_in, "inverse_proot_iterate");
  const Mat a = symmetric_input(a_in, "inverse_proot_iterate");
  const double fro = input_scale(a, true, "inverse_proot_iterate");
  (void)cholesky_spd_inverse(a);  // throws DefinitenessError for non-SPD input

  const std::size_t n = a.rows();
  const AlphaInterval interval = opts.unconstrained ? wide_interval()
                                 : opts.interval    ? *opts.interval
                                                    : default_inverse_newton_interval(p);
  const double c = std::pow(2.0 * fro / (p + 1.0), 1.0 / p);
  Mat x = Mat::identity(n);
  x *= 1.0 / c;
  Mat m = (1.0 / std::pow(c, p)) * a;

  Telemetry tel(opts, n, reported_interval(strategy, interval));
  Termination done = Termination::MaxIters;
  for (std::size_t k = 0;; ++k) {
    const Mat r = identity_minus(m);
    if (auto stop = tel.observe(k, r)) {
      done = *stop;
      break;
    }
    const double alpha = std::visit(
        Overloaded{[&](const Taylor&) { return 1.0 / p; },
                   [&](const FixedSchedule& fs) { return schedule_alpha(fs, k); },
                   [&](const auto&) {
                     QuarticLoss loss =
                         inverse_newton_loss_coeffs(strategy_traces(strategy, r, k, 2 * p + 2), p);
                     loss.interval = interval;
                     return minimize_poly_on_interval(loss);
                   }},
        strategy);
    tel.set_alpha(alpha);
    if (opts.on_step) opts.on_step(k, r, alpha);

    Mat b = alpha * r;
    add_to_diagonal(b, 1.0);
    x = mat_mul(x, b);
    Mat bp = b;
    for (unsigned i = 1; i < p; ++i) bp = mat_mul(bp, b);
    m = symmetrize(mat_mul(bp, m));
  }
  return {std::move(x), std::move(m), tel.finish(done)};
}

IterationResult db_newton_sqrt(const Mat& a_in, bool adaptive, const IterationOptions& opts) {
  validate(opts, Taylor{});
  require_square(a_in, "db_newton_sqrt");
  const Mat a = symmetric_input(a_in, "db_newton_sqrt");
  const double s = input_scale(a, opts.normalize_input, "db_newton_sqrt");
  const std::size_t n = a.rows();
  const AlphaInterval interval = opts.interval && !opts.unconstrained ? *opts.interval
                                                                      : wide_interval();

  Mat m = (1.0 / s) * a;
  Mat x = m;
  Mat y = Mat::identity(n);
  Telemetry tel(opts, n, adaptive ? std::optional<AlphaInterval>(interval) : std::nullopt);
  Termination done = Termination::MaxIters;
  for (std::size_t k = 0;; ++k) {
    const Mat r = identity_minus(m);
    if (auto stop = tel.observe(k, r)) {
      done = *stop;
      break;
    }
    Mat m_inv;
    try {
      m_inv = cholesky_spd_inverse(m);
    } catch (const DefinitenessError& e) {
      if (k == 0) throw;
      throw NumericalInstabilityError(
          "db_newton_sqrt: Cholesky factorization failed at iteration " + std::to_string(k) +
              " (" + e.what() + ")",
          k);
    } catch (const SymmetryError& e) {
      throw NumericalInstabilityError(
          "db_newton_sqrt: iterate lost symmetry at iteration " + std::to_string(k), k);
    }
    double alpha = 0.5;
    if (adaptive) {
      QuarticLoss loss = db_loss_coeffs(m, m_inv);
      loss.interval = interval;
      alpha = minimize_quartic_on_interval(loss);
    }
    tel.set_alpha(alpha);
    if (opts.on_step) opts.on_step(k, r, alpha);

    const double keep = 1.0 - alpha;
    Mat xm = mat_mul(x, m_inv);
    x *= keep;
    axpy(alpha, xm, x);
    Mat ym = mat_mul(y, m_inv);
    y *= keep;
    axpy(alpha, ym, y);
    m *= keep * keep;
    axpy(alpha * alpha, m_inv, m);
    add_to_diagonal(m, 2.0 * alpha * keep);
    m = symmetrize(m);
  }
  const double root = std::sqrt(s);
  return {root * x, (1.0 / root) * y, tel.finish(done)};
}

IterationResult chebyshev_inverse_iterate(const Mat& a, const CoefficientStrategy& strategy,
                                          const IterationOptions& opts) {
  validate(opts, strategy);
  require_square(a, "chebyshev_inverse_iterate");
  const double s = input_scale(a, opts.normalize_input, "chebyshev_inverse_iterate");
  const AlphaInterval interval = opts.unconstrained ? wide_interval()
                                 : opts.interval    ? *opts.interval
                                                    : AlphaInterval{0.5, 2.0};

  const Mat ahat = (1.0 / s) * a;
  Mat x = transpose(ahat);
  Telemetry tel(opts, a.rows(), reported_interval(strategy, interval));
  Termination done = Termination::MaxIters;
  for (std::size_t k = 0;; ++k) {
    const Mat r = identity_minus(mat_mul(ahat, x));
    if (auto stop = tel.observe(k, r)) {
      done = *stop;
      break;
    }
    const double alpha = std::visit(
        Overloaded{[&](const Taylor&) { return 1.0; },
                   [&](const FixedSchedule& fs) { return schedule_alpha(fs, k); },
                   [&](const auto&) {
                     return chebyshev_alpha(strategy_traces(strategy, r, k, 6), interval);
                   }},
        strategy);
    tel.set_alpha(alpha);
    if (opts.on_step) opts.on_step(k, r, alpha);

    const Mat r2 = mat_mul(r, r);
    Mat f = r;
    double c2 = alpha, c0 = 1.0;
    if (const auto* fs = std::get_if<FixedSchedule>(&strategy); fs && !fs->triples.empty()) {
      const CoefficientTriple& t = fs->triples[fs->index(k)];
      f *= t.b;
      c2 = t.c;
      c0 = t.a;
    }
    axpy(c2, r2, f);
    add_to_diagonal(f, c0);
    x = mat_mul(x, f);
  }
  return {(1.0 / s) * x, std::nullopt, tel.finish(done)};
}

}  // namespace prism
