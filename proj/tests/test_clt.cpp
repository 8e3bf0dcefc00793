#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "shrinklab/clt_lab.hpp"
#include "shrinklab/errors.hpp"
#include "shrinklab/special.hpp"

#include "oracles.hpp"

using namespace shrinklab;

namespace {

ProcessSpec iid_normal() { return {IidSpec{standard_normal()}, std::nullopt}; }

ProcessSpec chain(double lambda) {
  return {CancellationChainSpec{lambda}, std::nullopt};
}

}  // namespace

TEST_CASE("sigma estimate: iid normal at r = 0 is sqrt(n)") {
  const std::int64_t n = 100;
  const auto est = estimate_sigma(iid_normal(), 0.0, n, 2000, 21);
  CHECK(std::fabs(est.value - std::sqrt(static_cast<double>(n))) <=
        3.0 * est.std_error);
}

TEST_CASE("sigma estimate: iid normal at r = 3 matches the quadrature root") {
  const std::int64_t n = 100;
  const auto est = estimate_sigma(iid_normal(), 3.0, n, 4000, 22);
  const double expected = std::sqrt(2.0 * n * oracles::g_normal(3.0));
  CHECK(std::fabs(est.value - expected) <= 3.0 * est.std_error);
}

TEST_CASE("sigma estimate: cancellation chain sums stay order-one") {
  // within a window only the boundary excursions survive, so the norm
  // is flat in n instead of sqrt(n)-like
  const double r = 1.0;
  const double theta = 0.1;
  const auto est = estimate_sigma(chain(0.4), r, 50, 4000, 23);
  const double boundary_only =
      std::sqrt(2.0 * oracles::g_normal(r) * 2.0 * theta / (1.0 + 2.0 * theta));
  CHECK(std::fabs(est.value - boundary_only) <= 4.0 * est.std_error);
  // far below the independent-growth scale sqrt(n * Var)
  const double iid_scale = std::sqrt(50.0 * 2.0 * oracles::g_normal(r) / 6.0);
  CHECK(est.value < 0.5 * iid_scale);

  const auto est200 = estimate_sigma(chain(0.4), r, 200, 4000, 23);
  CHECK(std::fabs(est200.value - est.value) <=
        4.0 * (est.std_error + est200.std_error));
}

TEST_CASE("sigma estimate: degenerate case returns zero with zero error") {
  const ProcessSpec pm{IidSpec{point_mass_zero()}, std::nullopt};
  const auto est = estimate_sigma(pm, 1.0, 10, 200, 3);
  CHECK(est.value == 0.0);
  CHECK(est.std_error == 0.0);
}

TEST_CASE("common random numbers make the norm Lipschitz in r") {
  const std::int64_t n = 50;
  oracles::TestRng rng(8);
  double prev_r = 0.0;
  double prev_sigma =
      estimate_sigma(iid_normal(), prev_r, n, 500, 77).value;
  for (int i = 0; i < 8; ++i) {
    const double r = prev_r + 0.3 * rng.uniform();
    const double sigma = estimate_sigma(iid_normal(), r, n, 500, 77).value;
    CHECK(std::fabs(sigma - prev_sigma) <=
          2.0 * static_cast<double>(n) * std::fabs(r - prev_r) + 1e-9);
    prev_r = r;
    prev_sigma = sigma;
  }
}

TEST_CASE("solver matches the deterministic oracle") {
  const std::int64_t n = 100;
  const double tol = 0.02;
  const auto res = solve_rn(iid_normal(), n, tol, 5000, 91);
  CHECK(res.converged);
  CHECK(res.r_n > 0.0);
  CHECK(std::fabs(res.sigma_hat - 1.0) <= tol);
  const double band = tol + 3.0 * res.sigma_se;
  const double r_hi = oracles::rn_root_normal_iid(n, 1.0 - band);
  const double r_lo = oracles::rn_root_normal_iid(n, 1.0 + band);
  INFO("r_n ", res.r_n, " oracle band [", r_lo, ", ", r_hi, "]");
  CHECK(res.r_n >= r_lo);
  CHECK(res.r_n <= r_hi);
}

TEST_CASE("solver rejects n below the threshold") {
  CHECK_THROWS_AS(solve_rn(iid_normal(), 1, 0.02, 1000, 4),
                  PreconditionError);
}

TEST_CASE("solved radius grows with n") {
  const auto r100 = solve_rn(iid_normal(), 100, 0.02, 2000, 6);
  const auto r1000 = solve_rn(iid_normal(), 1000, 0.02, 2000, 6);
  CHECK(r100.r_n < r1000.r_n);
}

TEST_CASE("solver is deterministic and worker-count independent") {
  const auto a = solve_rn(iid_normal(), 200, 0.02, 1500, 10, 1);
  const auto b = solve_rn(iid_normal(), 200, 0.02, 1500, 10, 4);
  CHECK(a.r_n == b.r_n);
  CHECK(a.sigma_hat == b.sigma_hat);
  CHECK(a.bracket_history.size() == b.bracket_history.size());
}

TEST_CASE("standardized sums: centering and normalization") {
  const std::int64_t n = 400;
  const auto solve = solve_rn(iid_normal(), n, 0.02, 3000, 12);
  const auto sums =
      standardized_sums(iid_normal(), n, solve.r_n, 3000, 12);
  const auto mo = sample_moments(sums);
  const double mean_se = 1.0 / std::sqrt(3000.0);
  CHECK(std::fabs(mo.mean) <= 4.0 * mean_se);
  const double var_se = std::sqrt(2.0 / 3000.0);
  CHECK(std::fabs(mo.variance - 1.0) <= 4.0 * var_se + 2.0 * solve.tol);
  // the evaluation pool is keyed apart from the solver pool
  CHECK(derive_replicate_seed(12, StreamPurpose::kEvalPool, 0) !=
        derive_replicate_seed(12, StreamPurpose::kSolverPool, 0));
}

TEST_CASE("ks statistic") {
  // exact normal quantiles at (i - 1/2) / m: distance is 1 / (2m)
  const int m = 1000;
  std::vector<double> quantiles;
  for (int i = 1; i <= m; ++i) {
    quantiles.push_back(normal_quantile((i - 0.5) / m));
  }
  const auto cdf = [](double x) { return normal_cdf(x); };
  CHECK(ks_statistic(quantiles, cdf) ==
        doctest::Approx(1.0 / (2.0 * m)).epsilon(1e-9));

  CHECK(ks_statistic({0.0}, cdf) == doctest::Approx(0.5).epsilon(1e-12));

  // a uniform sample is far from the normal law
  std::vector<double> uni;
  for (int i = 1; i <= 200; ++i) uni.push_back((i - 0.5) / 200.0);
  CHECK(ks_statistic(uni, cdf) > 0.1);

  CHECK_THROWS_AS(ks_statistic({}, cdf), ConfigError);
}

TEST_CASE("lindeberg profile decreases along n") {
  const auto rows = lindeberg_profile(iid_normal(), {100, 1000}, {0.5},
                                      1500, 14);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value > rows[1].value);
  for (const auto& row : rows) {
    CHECK(row.value <= row.envelope + 1e-12);
    CHECK(row.value >= 0.0);
  }
}

TEST_CASE("variance sandwich") {
  const std::vector<std::int64_t> n_grid = {10, 50};
  const auto iid_rep =
      variance_sandwich_check(iid_normal(), 0.0, n_grid, 4000, 15);
  CHECK(iid_rep.all_inside);
  for (const auto& row : iid_rep.rows) {
    // independence: equality within Monte Carlo noise
    CHECK(std::fabs(row.estimate - static_cast<double>(row.n)) <=
          3.0 * row.est_se);
    CHECK(row.lower == doctest::Approx(static_cast<double>(row.n)));
    CHECK(row.upper == doctest::Approx(static_cast<double>(row.n)));
  }

  const ProcessSpec ma{
      MovingAverageSpec{{1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2},
                        standard_normal()},
      std::nullopt};
  const auto ma_rep = variance_sandwich_check(ma, 0.5, n_grid, 4000, 16);
  CHECK(ma_rep.all_inside);
  for (const auto& row : ma_rep.rows) {
    // E[(sum)^2] = 2n - 1 for this two-tap average
    CHECK(std::fabs(row.estimate - (2.0 * row.n - 1.0)) <=
          4.0 * row.est_se);
  }

  CHECK_THROWS_AS(
      variance_sandwich_check(chain(0.4), 0.5, n_grid, 1000, 17),
      PreconditionError);
  CHECK_THROWS_AS(variance_sandwich_check(iid_normal(), 1.0, n_grid, 1000, 17),
                  PreconditionError);
}

TEST_CASE("cancellation demo") {
  const auto rep = cancellation_demo(0.4, 10, 1.0, 3000, 18);
  CHECK(rep.lower_bound == doctest::Approx(0.6));
  CHECK(rep.exact_rest_prob >= rep.lower_bound);
  CHECK(rep.empirical_zero_freq >= rep.lower_bound - 3.0 * rep.freq_se);
  CHECK(rep.empirical_zero_freq >= rep.exact_rest_prob - 3.0 * rep.freq_se);

  // almost-sure resting when lambda is tiny
  const auto tiny = cancellation_demo(0.01, 10, 1.0, 2000, 19);
  CHECK(tiny.empirical_zero_freq >= 0.99 - 3.0 * tiny.freq_se);
}

TEST_CASE("resting windows cancel exactly") {
  const ProcessSpec spec = chain(0.4);
  std::vector<double> path;
  std::vector<int> states;
  int confirmed = 0;
  for (std::uint64_t rep = 0; rep < 400; ++rep) {
    const std::uint64_t seed =
        derive_replicate_seed(18, StreamPurpose::kEvalPool, rep);
    generate_path(spec, 20, seed, path, &states);
    if (states[1] == 1 && states[20] == 1) {
      double s = 0.0;
      for (double x : path) s += shrink(x, 0.75);
      CHECK(s == 0.0);
      ++confirmed;
    }
  }
  CHECK(confirmed > 100);
}

TEST_CASE("clt experiment: gates") {
  CHECK_THROWS_WITH_AS(
      (void)clt_experiment(chain(0.4), {100}, 500, 1),
      doctest::Contains("mixing-metadata gate"), PreconditionError);
  const ProcessSpec heavy{IidSpec{student_t(1.0)}, std::nullopt};
  CHECK_THROWS_WITH_AS((void)clt_experiment(heavy, {100}, 500, 1),
                       doctest::Contains("tail-condition gate"),
                       PreconditionError);
  const ProcessSpec lap{IidSpec{laplace(1.0)}, std::nullopt};
  CHECK_THROWS_WITH_AS((void)clt_experiment(lap, {100}, 500, 1),
                       doctest::Contains("tail-condition gate"),
                       PreconditionError);
}

TEST_CASE("clt experiment: small smoke run") {
  CltOptions options;
  options.solver_reps = 2000;
  const auto rep = clt_experiment(iid_normal(), {200}, 2000, 20, 0, options);
  REQUIRE(rep.stages.size() == 1);
  const auto& st = rep.stages.front();
  CHECK(st.solve.converged);
  CHECK(std::fabs(st.moments.variance - 1.0) < 0.15);
  CHECK(st.ks_distance < 0.12);
  CHECK(st.sum_variance_ratio > 0.5);
  CHECK(st.sum_variance_ratio < 1.5);
  REQUIRE(st.lindeberg.size() == options.eps_grid.size());
  for (const auto& row : st.lindeberg) {
    CHECK(row.value <= row.envelope + 1e-12);
  }
}
