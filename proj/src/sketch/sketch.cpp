#include "prism/sketch.hpp"

#include <cmath>
#include <string>

#include "prism/error.hpp"
#include "prism/gemm.hpp"
#include "prism/rng.hpp"

namespace prism {

double TraceTable::at(std::size_t i) const {
  if (i >= t.size()) {
    throw MissingPowerError("trace table holds powers up to " + std::to_string(max_power()) +
                            ", power " + std::to_string(i) + " requested");
  }
  return t[i];
}

SketchMatrix gaussian_sketch(std::size_t p, std::size_t n, std::uint64_t seed, SketchMean mean) {
  if (p == 0 || n == 0) throw ConfigError("gaussian_sketch: p and n must be positive");
  if (p > n) {
    throw ConfigError("gaussian_sketch: sketch rows p=" + std::to_string(p) + " exceed n=" +
                      std::to_string(n));
  }
  SketchMatrix s{Mat(p, n), p, seed};
  CounterRng rng(seed, streams::kSketch);
  rng.fill_normal(s.mat.values(), 1.0 / std::sqrt(static_cast<double>(p)));
  if (mean == SketchMean::ShiftedOne)
    for (double& v : s.mat.values()) v += 1.0;
  return s;
}

TraceTable sketched_power_traces(const Mat& r, const SketchMatrix& s, std::size_t max_power) {
  if (!r.is_square() || r.empty()) throw ShapeError("sketched_power_traces: R is not square");
  if (s.mat.cols() != r.rows()) {
    throw ShapeError("sketched_power_traces: sketch has " + std::to_string(s.mat.cols()) +
                     " columns, R has " + std::to_string(r.rows()) + " rows");
  }
  if (max_power == 0) throw ConfigError("sketched_power_traces: max_power must be >= 1");

  const Mat st = transpose(s.mat);
  TraceTable out;
  out.mode = TraceMode::Sketched;
  out.t.resize(max_power + 1);
  out.t[0] = frob_dot(st, st);
  Mat v = st;
  for (std::size_t i = 1; i <= max_power; ++i) {
    v = mat_mul(r, v);
    out.t[i] = frob_dot(st, v);
  }
  return out;
}

TraceTable exact_power_traces(const Mat& r, std::size_t max_power) {
  if (!r.is_square() || r.empty()) throw ShapeError("exact_power_traces: R is not square");
  if (max_power == 0) throw ConfigError("exact_power_traces: max_power must be >= 1");

  TraceTable out;
  out.mode = TraceMode::Exact;
  out.t.assign(max_power + 1, 0.0);
  out.t[0] = static_cast<double>(r.rows());

  if (is_symmetric(r, 1e-12)) {
    const std::size_t half = (max_power + 1) / 2;
    std::vector<Mat> powers;
    powers.reserve(half);
    powers.push_back(symmetrize(r));
    for (std::size_t i = 2; i <= half; ++i) powers.push_back(mat_mul(powers.back(), powers[0]));
    for (std::size_t i = 1; i <= max_power; ++i) {
      if (i <= half) {
        out.t[i] = trace(powers[i - 1]);
      } else {
        const std::size_t lo = i / 2;
        out.t[i] = frob_dot(powers[lo - 1], powers[i - lo - 1]);
      }
    }
    return out;
  }

  Mat p = r;
  out.t[1] = trace(p);
  for (std::size_t i = 2; i <= max_power; ++i) {
    p = mat_mul(p, r);
    out.t[i] = trace(p);
  }
  return out;
}

TraceTable power_sums(const std::vector<double>& eigenvalues, std::size_t max_power) {
  TraceTable out;
  out.mode = TraceMode::Exact;
  out.t.assign(max_power + 1, 0.0);
  for (double lam : eigenvalues) {
    double p = 1.0;
    for (std::size_t i = 0; i <= max_power; ++i) {
      out.t[i] += p;
      p *= lam;
    }
  }
  return out;
}

SketchRowsRecommendation recommended_sketch_rows(std::size_t n, std::size_t k_max, double delta) {
  if (n == 0 || k_max == 0) throw ConfigError("recommended_sketch_rows: n and k must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("recommended_sketch_rows: delta must lie in (0, 1)");
  }
  const double bound = 48.0 * (std::log(static_cast<double>(n)) + std::log(1.0 / delta) +
                               std::log(static_cast<double>(k_max)) + 27.6);
  return {static_cast<std::size_t>(std::ceil(bound)), kPracticalSketchRows};
}

}  // namespace prism
