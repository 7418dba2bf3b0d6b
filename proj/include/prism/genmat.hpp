#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "prism/mat.hpp"

namespace prism {

enum class EnsembleKind { GaussianIID, Wishart, Prescribed, HeavyTail };

/// Input ensemble description. The aspect ratio of the Wishart and heavy-tail kinds is
/// rows / cols; `values` is read only by Prescribed and `kappa` only by HeavyTail.
struct SpectrumSpec {
  EnsembleKind kind = EnsembleKind::GaussianIID;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;
  double kappa = 1.0;
};

std::string ensemble_name(EnsembleKind kind);
// Throws ConfigError on unknown names.
EnsembleKind parse_ensemble(const std::string& name);

// I.i.d. standard normal entries.
Mat gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

// G^T G for G = gaussian_matrix(n, m, seed): m x m, symmetrized. Requires n >= m >= 1.
Mat wishart_spd(std::size_t n, std::size_t m, std::uint64_t seed);

// U diag(values) V^T with U, V the Q factors of independent Gaussian matrices.
// values: length min(rows, cols), non-negative, descending (ConfigError otherwise).
Mat prescribed_spectrum_matrix(const std::vector<double>& values, std::size_t rows,
                               std::size_t cols, std::uint64_t seed);

// min(rows, cols) Marchenko-Pastur eigenvalues for aspect min/max (unit variance scale),
// drawn by inverse CDF from a 10^4-point table; unsorted, in draw order.
std::vector<double> marchenko_pastur_sample(std::size_t rows, std::size_t cols,
                                            std::uint64_t seed);

// Singular values sqrt(lambda_i w_i), lambda_i Marchenko-Pastur and w_i ~ InvGamma(kappa + 1,
// scale kappa), sorted descending and normalized to a unit maximum. The lambda draws match
// marchenko_pastur_sample for the same seed.
std::vector<double> htmp_singular_values(std::size_t rows, std::size_t cols, double kappa,
                                         std::uint64_t seed);

// Heavy-tailed stand-in for high-temperature Marchenko-Pastur matrices:
// prescribed_spectrum_matrix(htmp_singular_values(...)).
Mat htmp_like_matrix(std::size_t rows, std::size_t cols, double kappa, std::uint64_t seed);

// Dispatches on spec.kind. Wishart returns the cols x cols Gram matrix.
Mat generate(const SpectrumSpec& spec);

}  // namespace prism
