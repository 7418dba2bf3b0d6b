#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "prism/mat.hpp"
#include "prism/polyfit.hpp"
#include "prism/sketch.hpp"

namespace prism {

struct Taylor {};
struct PrismExact {};
struct PrismSketched {
  std::size_t p = kPracticalSketchRows;
  std::uint64_t seed = 0;
};

// X (a I + b R + c R^2), for importing externally published per-step coefficients.
struct CoefficientTriple {
  double a, b, c;
};

/// Precomputed per-iteration coefficients. Either `alphas` (alpha for this library's
/// surrogate) or `triples` is set. Past the end of the list the last entry repeats,
/// unless `cycle` wraps around.
struct FixedSchedule {
  std::vector<double> alphas;
  std::vector<CoefficientTriple> triples;
  bool cycle = false;

  std::size_t length() const noexcept { return triples.empty() ? alphas.size() : triples.size(); }
  std::size_t index(std::size_t k) const noexcept;
};

using CoefficientStrategy = std::variant<Taylor, PrismExact, PrismSketched, FixedSchedule>;

std::string strategy_name(const CoefficientStrategy& s);
bool is_prism(const CoefficientStrategy& s) noexcept;

struct IterationOptions {
  std::size_t max_iters = 100;
  double tol_fro = 1e-8;  // stop when ||R_k||_F <= tol_fro * sqrt(n)
  unsigned degree = 1;
  std::optional<AlphaInterval> interval;
  bool normalize_input = true;
  bool record_walltime = true;
  // Power-iteration steps for a per-record ||R_k||_2 estimate; 0 leaves it unset.
  std::size_t spectral_estimate_iters = 0;
  // Search alpha over wide_interval() instead of the certified interval (test mode).
  bool unconstrained = false;
  // sqrt_coupled_iterate: reject inputs with a negative eigenvalue up front (Jacobi check).
  bool validate_input = false;
  // Called once per update with (k, R_k, alpha_k) before X_{k+1} is formed.
  std::function<void(std::size_t, const Mat&, double)> on_step;
};

enum class Termination { Converged, MaxIters, Diverged };
std::string termination_name(Termination t);

struct IterationRecord {
  std::size_t k = 0;
  double residual_fro = 0.0;
  std::optional<double> residual_spec;
  std::optional<double> alpha;  // coefficient used for the step k -> k+1
  std::int64_t wall_ns = 0;     // cumulative since the solve started
};

struct ConvergenceReport {
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxIters;
  std::optional<AlphaInterval> interval;  // search interval of the PRISM strategies

  // Number of updates performed.
  std::size_t iterations() const noexcept { return records.empty() ? 0 : records.back().k; }
  // First k with residual_fro <= threshold, if any.
  std::optional<std::size_t> iterations_to(double threshold) const;
};

struct IterationResult {
  Mat primary;
  std::optional<Mat> secondary;
  ConvergenceReport report;
};

// X_{k+1} = X_k g_d(R_k; alpha_k), R_k = I - X_k^2. Converges to sign(a).
IterationResult sign_iterate(const Mat& a, const CoefficientStrategy& strategy,
                             const IterationOptions& opts = {});

// Coupled X_{k+1} = X_k g(R_k), Y_{k+1} = g(R_k) Y_k with R_k = I - X_k Y_k.
// primary -> a^{1/2}, secondary -> a^{-1/2}.
IterationResult sqrt_coupled_iterate(const Mat& a, const CoefficientStrategy& strategy,
                                     const IterationOptions& opts = {});

// X_{k+1} = X_k g(R_k), R_k = I - X_k^T X_k. primary -> U V^T for a = U S V^T.
IterationResult polar_iterate(const Mat& a, const CoefficientStrategy& strategy,
                              const IterationOptions& opts = {});

// Coupled inverse Newton: X_{k+1} = X_k (I + alpha R_k), M_{k+1} = (I + alpha R_k)^p M_k,
// R_k = I - M_k. primary -> a^{-1/p}, secondary -> M_k.
IterationResult inverse_proot_iterate(const Mat& a, unsigned p,
                                      const CoefficientStrategy& strategy,
                                      const IterationOptions& opts = {});

// Product-form Denman-Beavers iteration with M_k^{-1} from a Cholesky factorization.
// adaptive = false is the classical alpha = 1/2. primary -> a^{1/2}, secondary -> a^{-1/2}.
IterationResult db_newton_sqrt(const Mat& a, bool adaptive, const IterationOptions& opts = {});

// X_{k+1} = X_k (I + R_k + alpha R_k^2), R_k = I - a X_k. primary -> a^{-1}.
IterationResult chebyshev_inverse_iterate(const Mat& a, const CoefficientStrategy& strategy,
                                          const IterationOptions& opts = {});

}  // namespace prism
