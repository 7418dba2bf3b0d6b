#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "prism/error.hpp"
#include "prism/gemm.hpp"
#include "prism/genmat.hpp"
#include "prism/iterations.hpp"
#include "prism/linalg.hpp"
#include "prism/rng.hpp"

using namespace prism;

namespace {

void check_alphas_feasible(const ConvergenceReport& rep) {
  REQUIRE(rep.interval);
  for (const auto& r : rep.records)
    if (r.alpha) {
      CHECK(*r.alpha >= rep.interval->lower);
      CHECK(*r.alpha <= rep.interval->upper);
    }
}

void check_monotone(const ConvergenceReport& rep, double slack) {
  for (std::size_t i = 1; i < rep.records.size(); ++i)
    CHECK(rep.records[i].residual_fro <= slack * rep.records[i - 1].residual_fro + 1e-14);
}

double rel_fro(const Mat& got, const Mat& want) {
  return oracle::fro_diff(got, want) / oracle::fro(want);
}

Mat symmetric_sign_instance(std::size_t n, std::uint64_t seed) {
  const Mat q = householder_qr(gaussian_matrix(n, n, seed)).q;
  std::vector<double> d(n);
  CounterRng rng(seed, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = 0.05 + 0.95 * rng.uniform();
    d[i] = (i % 2 == 0) ? mag : -mag;
  }
  return symmetrize(oracle::matmul(oracle::matmul(q, Mat::diagonal(d)), oracle::transpose(q)));
}

}  // namespace

TEST_CASE("fixed schedule indexing") {
  FixedSchedule fs{{0.5, 0.7, 0.9}, {}, false};
  CHECK(fs.index(1) == 1);
  CHECK(fs.index(7) == 2);
  fs.cycle = true;
  CHECK(fs.index(7) == 1);
  CHECK(strategy_name(PrismSketched{8, 3}) == "prism-sketched:8:3");
  CHECK(is_prism(PrismExact{}));
  CHECK_FALSE(is_prism(Taylor{}));
}

TEST_CASE("option and strategy validation") {
  const Mat a = Mat::diagonal({0.9, -0.8});
  IterationOptions bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS(sign_iterate(a, Taylor{}, bad), ConfigError);
  bad = {};
  bad.tol_fro = 0;
  CHECK_THROWS_AS(sign_iterate(a, Taylor{}, bad), ConfigError);
  CHECK_THROWS_AS(sign_iterate(a, FixedSchedule{}, {}), ConfigError);
  IterationOptions d3;
  d3.degree = 3;
  CHECK_THROWS_AS(sign_iterate(a, PrismExact{}, d3), ConfigError);
}

TEST_CASE("sign iteration on a small diagonal") {
  const auto res = sign_iterate(Mat::diagonal({0.9, -0.8}), PrismExact{}, {});
  CHECK(res.report.termination == Termination::Converged);
  CHECK(res.report.iterations() <= 12);
  CHECK(max_abs_diff(res.primary, Mat::diagonal({1.0, -1.0})) < 1e-9);
  check_alphas_feasible(res.report);
  check_monotone(res.report, 1.0);
  CHECK_FALSE(res.report.records.back().alpha);
  CHECK(res.report.records.front().k == 0);
}

TEST_CASE("sign iteration edge cases") {
  // Frobenius normalization would move I off the fixed point, so it is switched off here.
  IterationOptions raw;
  raw.normalize_input = false;
  const auto id = sign_iterate(Mat::identity(4), PrismExact{}, raw);
  CHECK(id.report.iterations() == 0);
  CHECK(id.report.records.size() == 1);
  CHECK_THROWS_AS(sign_iterate(Mat(3, 3, 0.0), Taylor{}, {}), DegenerateInputError);
  CHECK_THROWS_AS(sign_iterate(Mat{{1, 2}, {0, 1}}, Taylor{}, {}), SymmetryError);
  CHECK_THROWS_AS(sign_iterate(Mat(2, 3, 1.0), Taylor{}, {}), ShapeError);
}

TEST_CASE("sign iteration on random symmetric matrices, all strategies and degrees") {
  const Mat a = symmetric_sign_instance(48, 5);
  const Mat want = reference_matrix_function(a, {MatrixFunction::Sign});
  for (unsigned d : {1u, 2u}) {
    IterationOptions opts;
    opts.degree = d;
    std::size_t taylor_iters = 0;
    for (const CoefficientStrategy& s :
         {CoefficientStrategy{Taylor{}}, CoefficientStrategy{PrismExact{}},
          CoefficientStrategy{PrismSketched{8, 42}}}) {
      CAPTURE(d);
      CAPTURE(strategy_name(s));
      const auto res = sign_iterate(a, s, opts);
      CHECK(res.report.termination == Termination::Converged);
      CHECK(rel_fro(res.primary, want) < 1e-8);
      CHECK(res.report.records.size() <= opts.max_iters + 1);
      if (std::holds_alternative<Taylor>(s)) taylor_iters = res.report.iterations();
      if (std::holds_alternative<PrismExact>(s)) {
        CHECK(res.report.iterations() <= taylor_iters);
        check_monotone(res.report, 1.0);
      }
      if (is_prism(s)) check_alphas_feasible(res.report);
      if (std::holds_alternative<PrismSketched>(s)) check_monotone(res.report, 1.05);
    }
  }
}

TEST_CASE("sign iteration accepts a non-symmetric block embedding with symmetric square") {
  // [[0, B], [I, 0]]^2 = diag(B, B); its sign is [[0, B^{1/2}], [B^{-1/2}, 0]].
  const std::size_t n = 6;
  Mat b = (1.0 / 40) * wishart_spd(40, n, 3);
  add_to_diagonal(b, 0.2);
  Mat a(2 * n, 2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a(n + i, i) = 1.0;
    for (std::size_t j = 0; j < n; ++j) a(i, n + j) = b(i, j);
  }
  const auto res = sign_iterate(a, PrismExact{}, {});
  REQUIRE(res.report.termination == Termination::Converged);
  const Mat root = reference_matrix_function(b, {MatrixFunction::Sqrt});
  const Mat inv_root = reference_matrix_function(b, {MatrixFunction::InvSqrt});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(res.primary(i, n + j) == doctest::Approx(root(i, j)).epsilon(1e-7));
      CHECK(res.primary(n + i, j) == doctest::Approx(inv_root(i, j)).epsilon(1e-7));
    }
}

TEST_CASE("scalar sign: alpha = 1 escapes a tiny start far faster than Taylor") {
  const Mat a{{1e-6}};
  IterationOptions opts;
  opts.normalize_input = false;
  opts.max_iters = 200;
  const auto taylor = sign_iterate(a, Taylor{}, opts);
  const auto fixed = sign_iterate(a, FixedSchedule{{1.0}, {}, false}, opts);
  const double half = 0.5;
  const auto kt = taylor.report.iterations_to(half);
  const auto kf = fixed.report.iterations_to(half);
  REQUIRE(kt);
  REQUIRE(kf);
  // Near zero the alpha = 1 map grows x by 2 per step against 3/2 for Taylor, so the
  // step-count ratio tends to ln(3/2) / ln 2 ~ 0.585 and never reaches 1/2.
  CHECK(*kf * 10 <= *kt * 6);
  CHECK(*kf * 10 >= *kt * 5);
  const double xi = 1.0 - 1e-12;
  CHECK(std::fabs(taylor.report.records[1].residual_fro - (1.0 - 2.25e-12)) <= 1e-12);
  CHECK(std::fabs(fixed.report.records[1].residual_fro - (xi * xi + xi * xi * xi - xi)) <=
        1e-12);
  // A 1e-12 residual tolerance cannot tell 4 x0^2 from (9/4) x0^2; the first iterates can.
  IterationOptions one = opts;
  one.max_iters = 1;
  CHECK(sign_iterate(a, Taylor{}, one).primary(0, 0) == doctest::Approx(1.5e-6).scale(0));
  CHECK(sign_iterate(a, FixedSchedule{{1.0}, {}, false}, one).primary(0, 0) ==
        doctest::Approx(2e-6).scale(0));
}

TEST_CASE("coupled square root") {
  const auto diag = sqrt_coupled_iterate(Mat::diagonal({4.0, 1.0}), PrismExact{}, {});
  CHECK(oracle::fro_diff(diag.primary, Mat::diagonal({2.0, 1.0})) < 1e-9);
  REQUIRE(diag.secondary);
  CHECK(oracle::fro_diff(*diag.secondary, Mat::diagonal({0.5, 1.0})) < 1e-9);

  IterationOptions raw;
  raw.normalize_input = false;
  const auto id = sqrt_coupled_iterate(Mat::identity(3), Taylor{}, raw);
  CHECK(id.report.iterations() == 0);
  CHECK(id.primary == Mat::identity(3));

  const Mat a = (1.0 / 64) * wishart_spd(128, 64, 8);
  const Mat root = reference_matrix_function(a, {MatrixFunction::Sqrt});
  for (const CoefficientStrategy& s :
       {CoefficientStrategy{Taylor{}}, CoefficientStrategy{PrismExact{}},
        CoefficientStrategy{PrismSketched{8, 1}}}) {
    CAPTURE(strategy_name(s));
    IterationOptions opts;
    const auto res = sqrt_coupled_iterate(a, s, opts);
    REQUIRE(res.report.termination == Termination::Converged);
    CHECK(rel_fro(oracle::matmul(res.primary, res.primary), a) <= 1e-8);
    CHECK(oracle::fro_diff(oracle::matmul(res.primary, *res.secondary), oracle::identity(64)) <=
          1e-7);
    CHECK(rel_fro(res.primary, root) <= 1e-8);
  }
  CHECK_THROWS_AS(sqrt_coupled_iterate(Mat{{1, 2}, {0, 1}}, Taylor{}, {}), SymmetryError);
  IterationOptions strict;
  strict.validate_input = true;
  CHECK_THROWS_AS(sqrt_coupled_iterate(Mat::diagonal({1.0, -1.0}), Taylor{}, strict),
                  DefinitenessError);
}

TEST_CASE("coupled square root iterates commute") {
  const Mat a = (1.0 / 48) * wishart_spd(96, 24, 2);
  IterationOptions opts;
  double worst = 0;
  // X_k and Y_k are both polynomials in a, so X_k Y_k = Y_k X_k; R_k is their product.
  Mat x = (1.0 / frob_norm(a)) * a;
  Mat y = Mat::identity(24);
  opts.on_step = [&](std::size_t, const Mat& r, double alpha) {
    const auto g = taylor_surrogate(SurrogateFamily::InvSqrtResidual, 1);
    const Mat f = eval_surrogate_matrix(g, alpha, r);
    x = oracle::matmul(x, f);
    y = oracle::matmul(f, y);
    worst = std::max(worst, oracle::fro_diff(oracle::matmul(x, y), oracle::matmul(y, x)));
  };
  const auto res = sqrt_coupled_iterate(a, PrismExact{}, opts);
  CHECK(res.report.termination == Termination::Converged);
  CHECK(worst <= 1e-8);
}

TEST_CASE("polar iteration") {
  const Mat q = householder_qr(gaussian_matrix(10, 4, 3)).q;
  IterationOptions raw;
  raw.normalize_input = false;
  const auto same = polar_iterate(q, PrismExact{}, raw);
  CHECK(same.report.iterations() == 0);
  CHECK(max_abs_diff(same.primary, q) < 1e-15);

  IterationOptions tight;
  tight.tol_fro = 1e-12;
  const auto d = polar_iterate(Mat::diagonal({3.0, 0.5}), PrismExact{}, tight);
  CHECK(oracle::fro_diff(d.primary, oracle::identity(2)) < 1e-9);

  CHECK_THROWS_AS(polar_iterate(Mat(3, 5, 1.0), Taylor{}, {}), ShapeError);

  const Mat a = gaussian_matrix(256, 128, 17);
  const Mat uvt = reference_polar(a);
  IterationOptions opts;
  opts.degree = 2;
  const auto exact = polar_iterate(a, PrismExact{}, opts);
  const auto taylor = polar_iterate(a, Taylor{}, opts);
  REQUIRE(exact.report.termination == Termination::Converged);
  CHECK(oracle::fro_diff(gram(exact.primary), oracle::identity(128)) <= 1e-8);
  CHECK(oracle::fro_diff(exact.primary, uvt) <= 1e-6);
  const auto ke = exact.report.iterations_to(1e-3);
  const auto kt = taylor.report.iterations_to(1e-3);
  REQUIRE(ke);
  REQUIRE(kt);
  CHECK(*ke < *kt);
  check_alphas_feasible(exact.report);
  check_monotone(exact.report, 1.0);
}

TEST_CASE("polar iteration cost per step") {
  const Mat a = gaussian_matrix(40, 16, 2);
  for (unsigned d : {1u, 2u}) {
    IterationOptions opts;
    opts.degree = d;
    opts.max_iters = 3;
    opts.tol_fro = 1e-300;
    ProductLog log;
    (void)polar_iterate(a, Taylor{}, opts);
    // R_k for k = 0..3 plus d products per update.
    CHECK(log.entries().size() == 4 + 3 * d);
  }
}

TEST_CASE("polar iteration with coefficient triples") {
  const Mat a = gaussian_matrix(30, 12, 4);
  // (15/8, -5/4, 3/8) in terms of X X^T X powers is Taylor d = 2; in residual form it is
  // g_2(R; 3/8) = I + R/2 + 3/8 R^2.
  const FixedSchedule triples{{}, {{1.0, 0.5, 0.375}}, false};
  IterationOptions opts;
  opts.degree = 2;
  const auto t = polar_iterate(a, triples, opts);
  const auto ref = polar_iterate(a, Taylor{}, opts);
  CHECK(t.report.iterations() == ref.report.iterations());
  CHECK(max_abs_diff(t.primary, ref.primary) < 1e-12);
  CHECK(*t.report.records.front().alpha == 0.375);
}

TEST_CASE("inverse p-th root") {
  const auto inv = inverse_proot_iterate(Mat::diagonal({2.0, 4.0}), 1, PrismExact{}, {});
  CHECK(oracle::fro_diff(inv.primary, Mat::diagonal({0.5, 0.25})) < 1e-10);
  CHECK(oracle::fro_diff(oracle::matmul(inv.primary, Mat::diagonal({2.0, 4.0})),
                         oracle::identity(2)) <= 1e-10);

  // ||a||_F = 3, p = 2 -> c = sqrt(2), M_0 = a / 2.
  const Mat a3 = Mat::diagonal({2.0, 2.0, 1.0});
  IterationOptions one;
  one.max_iters = 1;
  Mat m0;
  one.on_step = [&](std::size_t k, const Mat& r, double) {
    if (k == 0) m0 = shifted_negative(r, 1.0);
  };
  (void)inverse_proot_iterate(a3, 2, Taylor{}, one);
  CHECK(max_abs_diff(m0, 0.5 * a3) < 1e-15);

  Mat a = (1.0 / 64) * wishart_spd(160, 64, 6);
  const Mat want = reference_matrix_function(a, {MatrixFunction::InvSqrt});
  for (const CoefficientStrategy& s :
       {CoefficientStrategy{Taylor{}}, CoefficientStrategy{PrismExact{}},
        CoefficientStrategy{PrismSketched{8, 5}}}) {
    CAPTURE(strategy_name(s));
    const auto res = inverse_proot_iterate(a, 2, s, {});
    REQUIRE(res.report.termination == Termination::Converged);
    const Mat check = oracle::matmul(oracle::matmul(res.primary, res.primary), a);
    CHECK(oracle::fro_diff(check, oracle::identity(64)) <= 1e-7);
    CHECK(rel_fro(res.primary, want) <= 1e-7);
    if (is_prism(s)) check_alphas_feasible(res.report);
  }
  CHECK_THROWS_AS(inverse_proot_iterate(Mat::diagonal({1.0, -1.0}), 2, Taylor{}, {}),
                  DefinitenessError);
  CHECK_THROWS_AS(inverse_proot_iterate(a, 0, Taylor{}, {}), ConfigError);
}

TEST_CASE("db newton") {
  IterationOptions raw;
  raw.normalize_input = false;
  const auto id = db_newton_sqrt(Mat::identity(3), true, raw);
  CHECK(id.report.iterations() == 0);

  IterationOptions one;
  one.max_iters = 1;
  one.normalize_input = false;
  one.tol_fro = 1e-300;
  const auto step = db_newton_sqrt(Mat{{4.0}}, false, one);
  // After one classical step M_1 = 1/2 + 1 + 1/16; the residual record holds 1 - M_1.
  CHECK(step.report.records.back().residual_fro == doctest::Approx(25.0 / 16 - 1.0));

  Mat a = (1.0 / 64) * wishart_spd(128, 64, 12);
  const Mat want = reference_matrix_function(a, {MatrixFunction::Sqrt});
  const auto adaptive = db_newton_sqrt(a, true, {});
  const auto classical = db_newton_sqrt(a, false, {});
  REQUIRE(adaptive.report.termination == Termination::Converged);
  REQUIRE(classical.report.termination == Termination::Converged);
  CHECK(adaptive.report.iterations() <= classical.report.iterations());
  CHECK(rel_fro(adaptive.primary, want) <= 1e-7);
  CHECK(rel_fro(*adaptive.secondary,
                reference_matrix_function(a, {MatrixFunction::InvSqrt})) <= 1e-7);

  CHECK_THROWS_AS(db_newton_sqrt(Mat::diagonal({1.0, -2.0}), true, {}), DefinitenessError);
}

TEST_CASE("chebyshev inverse") {
  IterationOptions raw;
  raw.normalize_input = false;
  const auto id = chebyshev_inverse_iterate(Mat::identity(3), PrismExact{}, raw);
  CHECK(id.report.iterations() == 0);
  const auto two = chebyshev_inverse_iterate(Mat{{2.0}}, Taylor{}, {});
  CHECK(two.primary(0, 0) == doctest::Approx(0.5));

  Mat a = (0.1 / 8.0) * gaussian_matrix(64, 64, 21);
  add_to_diagonal(a, 1.0);
  const Mat want = oracle::inverse(a);
  for (const CoefficientStrategy& s :
       {CoefficientStrategy{Taylor{}}, CoefficientStrategy{PrismExact{}},
        CoefficientStrategy{PrismSketched{8, 2}}}) {
    CAPTURE(strategy_name(s));
    const auto res = chebyshev_inverse_iterate(a, s, {});
    REQUIRE(res.report.termination == Termination::Converged);
    CHECK(oracle::fro_diff(oracle::matmul(a, res.primary), oracle::identity(64)) <= 1e-9);
    CHECK(rel_fro(res.primary, want) <= 1e-9);
    if (is_prism(s)) check_alphas_feasible(res.report);
  }
}

TEST_CASE("divergence is reported, not thrown") {
  // alpha far outside the certified interval overshoots and the residual grows.
  IterationOptions opts;
  opts.normalize_input = false;
  const auto res = sign_iterate(Mat{{0.5}}, FixedSchedule{{5.0}, {}, false}, opts);
  CHECK(res.report.termination == Termination::Diverged);
  CHECK(res.report.records.size() <= opts.max_iters + 1);
}

TEST_CASE("telemetry fields") {
  IterationOptions opts;
  opts.spectral_estimate_iters = 30;
  const auto res = sign_iterate(symmetric_sign_instance(16, 2), PrismExact{}, opts);
  std::int64_t prev = -1;
  for (const auto& r : res.report.records) {
    REQUIRE(r.residual_spec);
    CHECK(*r.residual_spec <= r.residual_fro * (1 + 1e-12));
    CHECK(r.wall_ns >= prev);
    prev = r.wall_ns;
  }
  opts.record_walltime = false;
  const auto quiet = sign_iterate(symmetric_sign_instance(16, 2), PrismExact{}, opts);
  for (const auto& r : quiet.report.records) CHECK(r.wall_ns == 0);
}

TEST_CASE("unconstrained mode widens the interval") {
  IterationOptions opts;
  opts.unconstrained = true;
  const auto res = sign_iterate(symmetric_sign_instance(24, 7), PrismExact{}, opts);
  CHECK(res.report.termination == Termination::Converged);
  CHECK(res.report.interval->upper == 1e6);
}
