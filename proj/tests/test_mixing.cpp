#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "shrinklab/errors.hpp"
#include "shrinklab/mixing.hpp"

#include "oracles.hpp"

using namespace shrinklab;

namespace {

JointDistribution random_joint(oracles::TestRng& rng, int a, int b) {
  // Dirichlet-ish: exponential weights normalized to mass one.
  std::vector<double> flat(static_cast<std::size_t>(a * b));
  double total = 0.0;
  for (double& v : flat) {
    v = -std::log(rng.uniform());
    total += v;
  }
  for (double& v : flat) v /= total;
  // renormalize exactly enough for the mass gate
  double mass = 0.0;
  for (double v : flat) mass += v;
  flat.back() += 1.0 - mass;
  return JointDistribution(a, b, std::move(flat));
}

std::vector<std::vector<double>> to_rows(const JointDistribution& j) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(j.rows()));
  for (int i = 0; i < j.rows(); ++i) {
    for (int c = 0; c < j.cols(); ++c) {
      rows[static_cast<std::size_t>(i)].push_back(j.at(i, c));
    }
  }
  return rows;
}

}  // namespace

TEST_CASE("validation of joint laws") {
  CHECK_THROWS_AS(JointDistribution(2, 2, {0.5, 0.5, 0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(JointDistribution(2, 2, {-0.1, 0.6, 0.25, 0.25}),
                  ConfigError);
  CHECK_THROWS_AS(JointDistribution(2, 2, {1.0}), ConfigError);
}

TEST_CASE("independence gives exactly zero coefficients") {
  // dyadic marginals keep every intermediate float exact
  const auto j = JointDistribution::product({0.5, 0.5}, {0.25, 0.25, 0.5});
  CHECK(alpha_coefficient(j) == 0.0);
  CHECK(rho_coefficient(j) == 0.0);
}

TEST_CASE("perfect coupling: diagonal half-half") {
  const auto j = JointDistribution::from_rows({{0.5, 0.0}, {0.0, 0.5}});
  CHECK(alpha_coefficient(j) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(rho_coefficient(j) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate single-atom side") {
  const auto j = JointDistribution::from_rows({{0.3, 0.7}});
  CHECK(rho_coefficient(j) == 0.0);
  CHECK(alpha_coefficient(j) == 0.0);
}

TEST_CASE("alphabet cap") {
  std::vector<double> flat(17 * 2, 1.0 / 34.0);
  const JointDistribution j(17, 2, std::move(flat));
  CHECK_THROWS_AS(alpha_coefficient(j), ConfigError);
}

TEST_CASE("svd rho matches the ACE fixed point on random joints") {
  oracles::TestRng rng(314159);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto j = random_joint(rng, 3, 3);
    const double svd = rho_coefficient(j);
    const double ace = oracles::ace_rho(to_rows(j));
    worst = std::max(worst, std::fabs(svd - ace));
    CHECK(std::fabs(svd - ace) <= 1e-6);
    CHECK(4.0 * alpha_coefficient(j) <= svd + 1e-12);
    CHECK(svd <= 1.0);
  }
  INFO("worst svd-ace gap ", worst);
}

TEST_CASE("coefficients never increase under coarsening") {
  // merging two symbols realizes a sub-sigma-field on that side
  oracles::TestRng rng(2718);
  for (int trial = 0; trial < 25; ++trial) {
    const auto j = random_joint(rng, 4, 3);
    auto rows = to_rows(j);
    std::vector<std::vector<double>> merged;
    merged.push_back(rows[0]);
    merged.push_back(rows[1]);
    merged.push_back(rows[2]);
    for (std::size_t c = 0; c < merged[2].size(); ++c) {
      merged[2][c] += rows[3][c];
    }
    const auto jm = JointDistribution::from_rows(merged);
    CHECK(alpha_coefficient(jm) <= alpha_coefficient(j) + 1e-12);
    CHECK(rho_coefficient(jm) <= rho_coefficient(j) + 1e-9);
  }
}

TEST_CASE("coefficients are invariant under relabeling") {
  oracles::TestRng rng(5);
  const auto j = random_joint(rng, 3, 3);
  auto rows = to_rows(j);
  std::swap(rows[0], rows[2]);  // permute the row alphabet
  for (auto& row : rows) std::swap(row[0], row[1]);  // and the columns
  const auto jp = JointDistribution::from_rows(rows);
  CHECK(alpha_coefficient(jp) ==
        doctest::Approx(alpha_coefficient(j)).epsilon(1e-13));
  CHECK(rho_coefficient(jp) ==
        doctest::Approx(rho_coefficient(j)).epsilon(1e-10));
}

TEST_CASE("chain lagged joint") {
  const auto j = chain_lagged_joint(0.1, 1);
  REQUIRE(j.rows() == 3);
  REQUIRE(j.cols() == 3);
  // the state-2 row goes surely to 3, carrying its stationary mass
  CHECK(j.at(1, 0) == 0.0);
  CHECK(j.at(1, 1) == 0.0);
  CHECK(j.at(1, 2) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  // both marginals equal the stationary law at any lag
  for (std::uint64_t lag : {1ull, 2ull, 7ull, 40ull}) {
    const auto jl = chain_lagged_joint(0.1, lag);
    const auto rm = jl.row_marginals();
    const auto cm = jl.col_marginals();
    CHECK(rm[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(cm[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(rm[1] == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    CHECK(cm[2] == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
  }
  // far lags decorrelate: the joint approaches the product law
  CHECK(rho_coefficient(chain_lagged_joint(0.1, 60)) <= 1e-12);
}

TEST_CASE("one-step chain alpha obeys the atom bound") {
  // a side carrying an atom of mass >= 1 - 2 theta caps alpha at 2 theta
  for (double theta : {0.05, 0.1, 0.2}) {
    const double a = alpha_coefficient(chain_lagged_joint(theta, 1));
    CHECK(a <= 2.0 * theta + 1e-15);
    CHECK(a > 0.0);
  }
  // frozen value for theta = 0.1, derived by this very enumeration and
  // cross-checked against an independent implementation of it
  CHECK(alpha_coefficient(chain_lagged_joint(0.1, 1)) ==
        doctest::Approx(0.0763888888888889).epsilon(1e-10));
}

TEST_CASE("chain rho at lag 1 is exactly 1") {
  // state 2 forces state 3 one step later: the indicator pair is
  // perfectly correlated, so the maximal correlation is 1
  CHECK(rho_coefficient(chain_lagged_joint(0.1, 1)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chain rho decay is geometric past the deterministic step") {
  const auto rep = chain_rho_decay(0.1, 14);
  REQUIRE(rep.points.size() == 14);
  CHECK(rep.points[0].rho == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i + 1 < rep.points.size(); ++i) {
    CHECK(rep.points[i + 1].rho < rep.points[i].rho);
    CHECK(rep.points[i].rho > 0.0);
  }
  CHECK(rep.fit_from == 2);
  CHECK(rep.log_r_squared >= 0.99);
  // the decay rate tracks the modulus of the subdominant eigenvalue
  CHECK(rep.fitted_rate ==
        doctest::Approx(std::sqrt(0.1)).epsilon(0.05));
}

TEST_CASE("excursion boundary correlation equals one") {
  CHECK(std::fabs(excursion_boundary_correlation(0.4) - 1.0) <= 1e-12);
  CHECK(std::fabs(excursion_boundary_correlation(0.04) - 1.0) <= 1e-12);
  CHECK(std::fabs(excursion_boundary_correlation(0.9) - 1.0) <= 1e-12);
  CHECK_THROWS_AS(excursion_boundary_correlation(1.0), ConfigError);
}

TEST_CASE("csv round trip") {
  const auto j = JointDistribution::from_rows(
      {{0.125, 0.25}, {0.0625, 0.5625}});
  std::stringstream ss(j.to_csv());
  const auto back = JointDistribution::from_csv(ss);
  REQUIRE(back.rows() == 2);
  for (int i = 0; i < 2; ++i) {
    for (int c = 0; c < 2; ++c) CHECK(back.at(i, c) == j.at(i, c));
  }
}
