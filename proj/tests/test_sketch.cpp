#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "prism/error.hpp"
#include "prism/gemm.hpp"
#include "prism/rng.hpp"
#include "prism/sketch.hpp"

using namespace prism;

namespace {

Mat random_sym(std::size_t n, std::uint64_t seed, double scale) {
  Mat g(n, n);
  CounterRng(seed, 5).fill_normal(g.values(), scale / std::sqrt(double(n)));
  return symmetrize(g);
}

}  // namespace

TEST_CASE("gaussian sketch shape, scaling and reproducibility") {
  const auto s = gaussian_sketch(8, 500, 3);
  CHECK(s.mat.rows() == 8);
  CHECK(s.mat.cols() == 500);
  CHECK(s.mat == gaussian_sketch(8, 500, 3).mat);
  CHECK_FALSE(s.mat == gaussian_sketch(8, 500, 4).mat);
  // E ||S||_F^2 = n for entries of variance 1/p.
  CHECK(frob_dot(s.mat, s.mat) == doctest::Approx(500.0).epsilon(0.1));
  double mean = 0;
  for (double v : s.mat.values()) mean += v;
  CHECK(std::fabs(mean / 4000.0) < 0.03);

  const auto shifted = gaussian_sketch(8, 500, 3, SketchMean::ShiftedOne);
  double shifted_mean = 0;
  for (double v : shifted.mat.values()) shifted_mean += v;
  CHECK(shifted_mean / 4000.0 == doctest::Approx(1.0).epsilon(0.05));

  CHECK_THROWS_AS(gaussian_sketch(9, 8, 1), ConfigError);
  CHECK_THROWS_AS(gaussian_sketch(0, 8, 1), ConfigError);
}

TEST_CASE("exact power traces match dense powering") {
  const Mat r = random_sym(20, 1, 0.8);
  const auto t = exact_power_traces(r, 10);
  CHECK(t.mode == TraceMode::Exact);
  CHECK(t.max_power() == 10);
  CHECK(t.at(0) == 20.0);
  for (unsigned i = 1; i <= 10; ++i) {
    const double want = oracle::trace(oracle::power(r, i));
    CAPTURE(i);
    CHECK(std::fabs(t.at(i) - want) <= 1e-12 * std::max(1.0, std::fabs(want)) * 20);
  }
  CHECK_THROWS_AS(t.at(11), MissingPowerError);

  Mat nonsym = r;
  nonsym(0, 1) += 0.3;
  const auto tn = exact_power_traces(nonsym, 5);
  for (unsigned i = 1; i <= 5; ++i)
    CHECK(tn.at(i) == doctest::Approx(oracle::trace(oracle::power(nonsym, i))).epsilon(1e-12));
}

TEST_CASE("exact traces of symmetric R form only the lower half of the powers") {
  const Mat r = random_sym(16, 2, 0.5);
  ProductLog log;
  (void)exact_power_traces(r, 10);
  CHECK(log.count_square(16) == 4);
}

TEST_CASE("sketched traces equal tr(S R^i S^T) with max_power thin products") {
  const std::size_t n = 40, p = 6;
  const Mat r = random_sym(n, 3, 0.7);
  const auto s = gaussian_sketch(p, n, 9);
  ProductLog log;
  const auto t = sketched_power_traces(r, s, 6);
  CHECK(log.entries().size() == 6);
  CHECK(log.count_square(n) == 0);
  for (const auto& e : log.entries()) CHECK(e.n == p);
  CHECK(t.mode == TraceMode::Sketched);
  for (unsigned i = 0; i <= 6; ++i) {
    const Mat m = oracle::matmul(oracle::matmul(s.mat, oracle::power(r, i)),
                                 oracle::transpose(s.mat));
    CHECK(t.at(i) == doctest::Approx(oracle::trace(m)).epsilon(1e-11));
  }
  CHECK_THROWS_AS(sketched_power_traces(r, gaussian_sketch(2, 30, 1), 3), ShapeError);
}

TEST_CASE("sketched traces are unbiased") {
  const std::size_t n = 30;
  const Mat r = random_sym(n, 4, 0.9);
  const double want = oracle::trace(oracle::power(r, 2));
  double acc = 0;
  const int trials = 400;
  for (int k = 0; k < trials; ++k)
    acc += sketched_power_traces(r, gaussian_sketch(8, n, derive_seed(11, k)), 2).at(2);
  CHECK(acc / trials == doctest::Approx(want).epsilon(0.05));
}

TEST_CASE("power sums") {
  const auto t = power_sums({0.5, -0.25, 1.0}, 3);
  CHECK(t.at(0) == 3.0);
  CHECK(t.at(1) == doctest::Approx(1.25));
  CHECK(t.at(3) == doctest::Approx(0.125 - 0.015625 + 1.0));
}

TEST_CASE("recommended sketch rows") {
  const auto rec = recommended_sketch_rows(4096, 20, 0.01);
  CHECK(rec.guarantee_bound == 2089);
  CHECK(rec.practical == 8);
  CHECK_THROWS_AS(recommended_sketch_rows(10, 5, 0.0), ConfigError);
  CHECK_THROWS_AS(recommended_sketch_rows(10, 5, 1.5), ConfigError);
}
