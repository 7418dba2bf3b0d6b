#include "prism/genmat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prism/error.hpp"
#include "prism/gemm.hpp"
#include "prism/linalg.hpp"
#include "prism/rng.hpp"

namespace prism {

namespace {

constexpr std::size_t kMpTablePoints = 10000;
constexpr std::uint64_t kMixingStream = streams::kSpectrum + 1;

void require_dims(std::size_t rows, std::size_t cols, const char* who) {
  if (rows == 0 || cols == 0)
    throw ConfigError(std::string(who) + ": rows and cols must be >= 1");
}

// Marsaglia-Tsang; shape >= 1.
double gamma_draw(CounterRng& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

// Inverse CDF of the Marchenko-Pastur law for aspect y in (0, 1]. The table is built in
// lambda = a + (b - a)(1 - cos t)/2, where the density times d lambda is smooth even at
// the hard edge a = 0 of the square case.
class MpQuantile {
 public:
  explicit MpQuantile(double y) {
    const double sy = std::sqrt(y);
    a_ = (1.0 - sy) * (1.0 - sy);
    b_ = (1.0 + sy) * (1.0 + sy);
    theta_.resize(kMpTablePoints);
    cdf_.resize(kMpTablePoints);
    const double half = 0.5 * (b_ - a_);
    auto integrand = [&](double t) {
      const double lam = lambda(t);
      const double s = std::sin(t);
      if (lam <= 0.0) return half * half * 4.0 / b_;  // limit of s^2 / lam as t -> 0 when a = 0
      return half * half * s * s / lam;
    };
    double prev = integrand(0.0);
    cdf_[0] = 0.0;
    for (std::size_t i = 1; i < kMpTablePoints; ++i) {
      theta_[i] = std::numbers::pi * static_cast<double>(i) / (kMpTablePoints - 1);
      const double cur = integrand(theta_[i]);
      cdf_[i] = cdf_[i - 1] + 0.5 * (prev + cur) * (theta_[i] - theta_[i - 1]);
      prev = cur;
    }
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
  }

  double operator()(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return lambda(0.0);
    if (it == cdf_.end()) return lambda(std::numbers::pi);
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    const double f = (u - cdf_[i - 1]) / (cdf_[i] - cdf_[i - 1]);
    return lambda(theta_[i - 1] + f * (theta_[i] - theta_[i - 1]));
  }

 private:
  double lambda(double t) const { return a_ + (b_ - a_) * 0.5 * (1.0 - std::cos(t)); }

  double a_, b_;
  std::vector<double> theta_, cdf_;
};

}  // namespace

std::string ensemble_name(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::GaussianIID: return "gaussian";
    case EnsembleKind::Wishart: return "wishart";
    case EnsembleKind::Prescribed: return "prescribed";
    case EnsembleKind::HeavyTail: return "htmp";
  }
  return "unknown";
}

EnsembleKind parse_ensemble(const std::string& name) {
  if (name == "gaussian") return EnsembleKind::GaussianIID;
  if (name == "wishart") return EnsembleKind::Wishart;
  if (name == "prescribed") return EnsembleKind::Prescribed;
  if (name == "htmp" || name == "heavy-tail") return EnsembleKind::HeavyTail;
  throw ConfigError("unknown ensemble kind '" + name + "'");
}

Mat gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  require_dims(rows, cols, "gaussian_matrix");
  Mat g(rows, cols);
  CounterRng rng(seed, streams::kGaussianMatrix);
  rng.fill_normal(g.values());
  return g;
}

Mat wishart_spd(std::size_t n, std::size_t m, std::uint64_t seed) {
  require_dims(n, m, "wishart_spd");
  if (n < m) throw ConfigError("wishart_spd: needs n >= m");
  return gram(gaussian_matrix(n, m, seed));
}

Mat prescribed_spectrum_matrix(const std::vector<double>& values, std::size_t rows,
                               std::size_t cols, std::uint64_t seed) {
  require_dims(rows, cols, "prescribed_spectrum_matrix");
  const std::size_t k = std::min(rows, cols);
  if (values.size() != k)
    throw ConfigError("prescribed_spectrum_matrix: expected " + std::to_string(k) +
                      " values, got " + std::to_string(values.size()));
  for (std::size_t i = 0; i < k; ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
      throw ConfigError("prescribed_spectrum_matrix: values must be finite and non-negative");
    if (i > 0 && values[i] > values[i - 1])
      throw ConfigError("prescribed_spectrum_matrix: values must be descending");
  }
  Mat u = householder_qr(gaussian_matrix(rows, k, derive_seed(seed, 1))).q;
  const Mat v = householder_qr(gaussian_matrix(cols, k, derive_seed(seed, 2))).q;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < k; ++j) u(i, j) *= values[j];
  return mat_mul(u, transpose(v));
}

std::vector<double> marchenko_pastur_sample(std::size_t rows, std::size_t cols,
                                            std::uint64_t seed) {
  require_dims(rows, cols, "marchenko_pastur_sample");
  const std::size_t k = std::min(rows, cols);
  const double y = static_cast<double>(k) / static_cast<double>(std::max(rows, cols));
  const MpQuantile quantile(y);
  CounterRng rng(seed, streams::kSpectrum);
  std::vector<double> lam(k);
  for (double& l : lam) l = quantile(rng.uniform());
  return lam;
}

std::vector<double> htmp_singular_values(std::size_t rows, std::size_t cols, double kappa,
                                         std::uint64_t seed) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw ConfigError("htmp: kappa must be a positive finite number");
  std::vector<double> s = marchenko_pastur_sample(rows, cols, seed);
  CounterRng mix(seed, kMixingStream);
  for (double& v : s) {
    const double w = kappa / gamma_draw(mix, kappa + 1.0);
    v = std::sqrt(v * w);
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  const double top = s.front();
  if (top > 0.0)
    for (double& v : s) v /= top;
  return s;
}

Mat htmp_like_matrix(std::size_t rows, std::size_t cols, double kappa, std::uint64_t seed) {
  return prescribed_spectrum_matrix(htmp_singular_values(rows, cols, kappa, seed), rows, cols,
                                    seed);
}

Mat generate(const SpectrumSpec& spec) {
  switch (spec.kind) {
    case EnsembleKind::GaussianIID: return gaussian_matrix(spec.rows, spec.cols, spec.seed);
    case EnsembleKind::Wishart: return wishart_spd(spec.rows, spec.cols, spec.seed);
    case EnsembleKind::Prescribed:
      return prescribed_spectrum_matrix(spec.values, spec.rows, spec.cols, spec.seed);
    case EnsembleKind::HeavyTail:
      return htmp_like_matrix(spec.rows, spec.cols, spec.kappa, spec.seed);
  }
  throw ConfigError("generate: unknown ensemble kind");
}

}  // namespace prism
