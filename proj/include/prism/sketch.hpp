#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "prism/mat.hpp"

namespace prism {

enum class SketchMean {
  Centered,    // N(0, 1/p): the embedding used everywhere in the library
  ShiftedOne,  // N(1, 1/p): comparison ensemble, only exercised by tests
};

/// p x n Gaussian sketch, reproducible from (p, n, seed).
struct SketchMatrix {
  Mat mat;
  std::size_t rows = 0;
  std::uint64_t seed = 0;
};

SketchMatrix gaussian_sketch(std::size_t p, std::size_t n, std::uint64_t seed,
                             SketchMean mean = SketchMean::Centered);

enum class TraceMode { Sketched, Exact };

/// t[i] = tr(S R^i S^T) (Sketched) or tr(R^i) (Exact) for i = 0..max_power.
struct TraceTable {
  std::vector<double> t;
  TraceMode mode = TraceMode::Exact;

  std::size_t max_power() const noexcept { return t.empty() ? 0 : t.size() - 1; }
  // Throws MissingPowerError when i > max_power().
  double at(std::size_t i) const;
};

// V_0 = S^T, V_i = R V_{i-1}, t_i = <S^T, V_i>_F. Performs exactly max_power products of
// shape (n x n) * (n x p).
TraceTable sketched_power_traces(const Mat& r, const SketchMatrix& s, std::size_t max_power);

// Exact tr(R^i). For symmetric R only powers up to ceil(max_power / 2) are formed and the
// rest come from tr(R^{i+j}) = <R^i, R^j>_F.
TraceTable exact_power_traces(const Mat& r, std::size_t max_power);

// Power sums of explicit eigenvalues, sum_j lambda_j^i, in Exact mode.
TraceTable power_sums(const std::vector<double>& eigenvalues, std::size_t max_power);

inline constexpr std::size_t kPracticalSketchRows = 8;

struct SketchRowsRecommendation {
  std::size_t guarantee_bound;  // ceil(48 (ln n + ln(1/delta) + ln k + 27.6))
  std::size_t practical;      // kPracticalSketchRows
};

// The additive constant is 27.6 as stated with the sketched convergence bound; the longer
// derivation of the same bound carries ln k + 41.4 instead, which is not used here.
SketchRowsRecommendation recommended_sketch_rows(std::size_t n, std::size_t k_max, double delta);

}  // namespace prism
