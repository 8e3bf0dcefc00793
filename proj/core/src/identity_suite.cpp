#include "shrinklab/identity_suite.hpp"

#include <cmath>

#include "shrinklab/rng.hpp"
#include "shrinklab/shrink.hpp"

namespace shrinklab {

namespace {

struct Recorder {
  IdentityCheck* check;
  double tol;
  void operator()(double deviation) {
    if (deviation > check->max_deviation) check->max_deviation = deviation;
    if (!(deviation <= tol)) ++check->failures;
  }
  void require(bool ok) {
    if (!ok) {
      ++check->failures;
      check->max_deviation = std::max(check->max_deviation, 1.0);
    }
  }
};

}  // namespace

IdentitySuiteResult run_identity_suite(std::int64_t trials,
                                       std::uint64_t seed, double tolerance) {
  IdentitySuiteResult result;
  result.trials = trials;
  result.tolerance = tolerance;
  result.checks = {
      {"semigroup composition", 0.0, 0},
      {"oddness", 0.0, 0},
      {"monotone decay in the radius", 0.0, 0},
      {"contraction", 0.0, 0},
      {"lipschitz in the radius", 0.0, 0},
      {"residual bound |x - U(x)| <= r", 0.0, 0},
      {"detour inequality", 0.0, 0},
      {"detour equality on |x| >= s >= r", 0.0, 0},
      {"threshold equivalence", 0.0, 0},
      {"dead-zone doubling", 0.0, 0},
      {"boundary |x| = r maps to 0", 0.0, 0},
      {"zero radius is the identity", 0.0, 0},
  };
  enum {
    kSemigroup,
    kOdd,
    kMonotone,
    kContraction,
    kLipschitz,
    kResidual,
    kDetour,
    kDetourEq,
    kThreshold,
    kDoubling,
    kBoundary,
    kZeroRadius,
  };
  const RngStream rng = make_stream(seed, StreamPurpose::kScratch, 0);

  for (std::int64_t i = 0; i < trials; ++i) {
    const std::uint64_t idx = static_cast<std::uint64_t>(i);
    // Moderate scales keep the exact identities inside the tolerance.
    const double scale = std::exp(2.3 * (2.0 * rng.uniform(idx, 0) - 1.0));
    double x = 20.0 * scale * (2.0 * rng.uniform(idx, 1) - 1.0);
    double r = 10.0 * scale * rng.uniform(idx, 2);
    double s = 10.0 * scale * rng.uniform(idx, 3);
    // Inject exact boundary configurations on a slice of the trials.
    const double u = rng.uniform(idx, 4);
    if (u < 0.05) {
      x = (rng.uniform(idx, 5) < 0.5) ? r : -r;  // |x| = r
    } else if (u < 0.10) {
      r = 0.0;
    } else if (u < 0.15) {
      s = r;
    }

    Recorder rec{nullptr, tolerance};

    rec.check = &result.checks[kSemigroup];
    rec(std::fabs(shrink(shrink(x, s), r) - shrink(x, r + s)));

    rec.check = &result.checks[kOdd];
    rec(std::fabs(shrink(-x, r) + shrink(x, r)));

    rec.check = &result.checks[kMonotone];
    {
      const double lo_r = std::min(r, s);
      const double hi_r = std::max(r, s);
      rec.require(shrink_magnitude(x, hi_r) <=
                  shrink_magnitude(x, lo_r) + tolerance);
      // decay to zero: the magnitude vanishes once the radius covers x
      rec.require(shrink(x, std::fabs(x)) == 0.0);
    }

    rec.check = &result.checks[kContraction];
    rec.require(shrink_magnitude(x, r) <= std::fabs(x));

    rec.check = &result.checks[kLipschitz];
    {
      const double d = std::fabs(shrink(x, s) - shrink(x, r));
      rec(std::max(0.0, d - std::fabs(s - r)));
    }

    rec.check = &result.checks[kResidual];
    rec(std::max(0.0, std::fabs(x - shrink(x, r)) - r));

    rec.check = &result.checks[kDetour];
    rec(std::max(0.0, shrink_magnitude(x, r) -
                          (std::fabs(s - r) + shrink_magnitude(x, s))));

    rec.check = &result.checks[kDetourEq];
    {
      const double lo_r = std::min(r, s);
      const double hi_s = std::max(r, s);
      if (std::fabs(x) >= hi_s) {
        rec(std::fabs(shrink_magnitude(x, lo_r) -
                      ((hi_s - lo_r) + shrink_magnitude(x, hi_s))));
      }
    }

    rec.check = &result.checks[kThreshold];
    {
      // two-sided check with a float-safe margin
      const double t = 0.01 + 10.0 * scale * rng.uniform(idx, 6);
      const double margin = tolerance;
      if (std::fabs(x) >= r + t + margin) {
        rec.require(shrink_magnitude(x, r) >= t - margin);
      }
      if (std::fabs(x) <= r + t - margin) {
        rec.require(shrink_magnitude(x, r) <= t + margin);
      }
    }

    rec.check = &result.checks[kDoubling];
    {
      const double eps = 0.01 + 10.0 * scale * rng.uniform(idx, 7);
      if (std::fabs(x) >= r + eps) {
        rec(std::max(0.0, shrink_magnitude(x, r) -
                              2.0 * shrink_magnitude(x, r + eps / 2.0)));
      }
    }

    rec.check = &result.checks[kBoundary];
    rec.require(shrink(r, r) == 0.0 && shrink(-r, r) == 0.0);

    rec.check = &result.checks[kZeroRadius];
    rec.require(shrink(x, 0.0) == x);
  }

  for (const auto& c : result.checks) {
    if (c.failures > 0) result.all_pass = false;
  }
  return result;
}

}  // namespace shrinklab
