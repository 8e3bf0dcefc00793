#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "shrinklab/identity_suite.hpp"
#include "shrinklab/shrink.hpp"

#include "oracles.hpp"

using shrinklab::shrink;
using shrinklab::shrink_magnitude;
using shrinklab::ShrinkRadius;

TEST_CASE("shrink branches") {
  CHECK(shrink(5.0, 2.0) == 3.0);
  CHECK(shrink(-5.0, 2.0) == -3.0);
  CHECK(shrink(0.5, 1.0) == 0.0);
  CHECK(shrink(0.0, 1.0) == 0.0);
  // zero radius is the identity, bit for bit
  for (double x : {-7.25, -1e-9, 0.0, 0.3, 123.456}) {
    CHECK(shrink(x, 0.0) == x);
  }
}

TEST_CASE("shrink magnitude") {
  CHECK(shrink_magnitude(-5.0, 2.0) == 3.0);
  CHECK(shrink_magnitude(1.0, 1.0) == 0.0);
  CHECK(shrink_magnitude(7.0, 0.0) == 7.0);
  oracles::TestRng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const double x = 50.0 * (2.0 * rng.uniform() - 1.0);
    const double r = 25.0 * rng.uniform();
    CHECK(shrink_magnitude(x, r) == std::fabs(shrink(x, r)));
  }
}

TEST_CASE("boundary |x| = r is exactly zero") {
  oracles::TestRng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double r = 100.0 * rng.uniform();
    CHECK(shrink(r, r) == 0.0);
    CHECK(shrink(-r, r) == 0.0);
  }
}

TEST_CASE("domain errors") {
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(shrink(inf, 1.0), std::domain_error);
  CHECK_THROWS_AS(shrink(nan, 1.0), std::domain_error);
  CHECK_THROWS_AS(ShrinkRadius(-1.0), std::domain_error);
  CHECK_THROWS_AS(ShrinkRadius(inf), std::domain_error);
  CHECK_THROWS_AS(ShrinkRadius(nan), std::domain_error);
}

TEST_CASE("oddness is exact in floating point") {
  oracles::TestRng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const double x = std::exp(8.0 * (2.0 * rng.uniform() - 1.0)) *
                     (rng.uniform() < 0.5 ? -1.0 : 1.0);
    const double r = std::exp(6.0 * (2.0 * rng.uniform() - 1.0));
    CHECK(shrink(-x, r) == -shrink(x, r));
  }
}

TEST_CASE("inequality identities hold at extreme scales") {
  // The inequality-type identities are float-robust even for inputs
  // the tolerance-based battery avoids.
  oracles::TestRng rng(11);
  for (int i = 0; i < 5000; ++i) {
    const double x = std::exp(200.0 * (2.0 * rng.uniform() - 1.0)) *
                     (rng.uniform() < 0.5 ? -1.0 : 1.0);
    const double r = std::exp(150.0 * (2.0 * rng.uniform() - 1.0));
    CHECK(shrink_magnitude(x, r) <= std::fabs(x));
    CHECK(std::fabs(x - shrink(x, r)) <= r * (1.0 + 1e-15) + 1e-300);
  }
}

TEST_CASE("identity battery") {
  const auto result = shrinklab::run_identity_suite(20000, 42);
  for (const auto& check : result.checks) {
    INFO(check.name, " max deviation ", check.max_deviation);
    CHECK(check.failures == 0);
  }
  CHECK(result.all_pass);
  CHECK(result.trials == 20000);
}
