#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "shrinklab/quadrature.hpp"
#include "shrinklab/rng.hpp"
#include "shrinklab/shrink.hpp"

namespace shrinklab {

enum class MarginalFamily {
  kNormal,
  kLaplace,
  kStudentT,
  kZeroInflatedNormal,
  kPointMassZero,
};

// Analytic description of the law of a single observation. The
// continuous part is carried by `density`; a point mass at the origin
// (if any) is carried separately so expectations stay exact.
struct Marginal {
  std::string name;
  MarginalFamily family = MarginalFamily::kNormal;
  std::vector<double> params;

  std::function<double(double)> tail;      // t >= 0  ->  P(|X| > t)
  std::function<double(double)> density;   // continuous part; may be empty
  double atom_at_zero = 0.0;               // P(X = 0)
  std::function<double(double)> quantile;  // u in (0,1) -> F^{-1}(u)
  double mean = 0.0;
  bool symmetric = false;
  double second_moment = std::numeric_limits<double>::infinity();

  // One draw per time index; a sampler owns every lane at its index.
  std::function<double(const RngStream&, std::uint64_t index)> sampler;

  bool has_density() const { return static_cast<bool>(density); }
};

Marginal standard_normal();
Marginal normal(double mean, double sd);
Marginal laplace(double rate);
Marginal student_t(double nu);
// p * (point mass at 0) + (1 - p) * N(0,1)
Marginal zero_inflated_normal(double p);
Marginal point_mass_zero();

// Tail second-moment functional: integral over t >= 0 of
// t * P(|X| > t + r); equals E[shrink(X, r)^2] / 2. Returns +infinity
// when the integral diverges.
double g_function(const Marginal& dist, ShrinkRadius r,
                  const QuadratureOptions& opts = {});

// E[shrink(X, r)^2] = 2 * g_function(dist, r). Throws
// PreconditionError when the moment is infinite.
double shrunken_second_moment(const Marginal& dist, ShrinkRadius r,
                              const QuadratureOptions& opts = {});

// m_r = E[shrink(X, r)]; exactly 0 for symmetric laws, quadrature
// against the density otherwise.
double shrunken_mean(const Marginal& dist, ShrinkRadius r,
                     const QuadratureOptions& opts = {});

// Var[shrink(X, r)] / E[shrink(X, r)^2], in (0, 1]. Throws
// PreconditionError when shrink(X, r) is degenerate.
double shrunken_variance_ratio(const Marginal& dist, ShrinkRadius r,
                               const QuadratureOptions& opts = {});

// E[Y^2 1(|Y| >= eps)] with Y = shrink(X, r) - m_r.
double lindeberg_tail(const Marginal& dist, ShrinkRadius r, double eps,
                      const QuadratureOptions& opts = {});

struct TailRatioPoint {
  double r = 0.0;
  double eps = 0.0;
  double ratio = 0.0;  // G(r + eps) / G(r)
};

struct TailConditionReport {
  bool holds_positivity = false;      // 0 < G(r) < infinity on the grid
  bool holds_ratio_vanishes = false;  // finite-grid surrogate of the limit
  std::vector<double> g_values;       // G at each grid radius
  std::vector<TailRatioPoint> ratio_curve;
  std::string diagnostics;
};

// Evaluates G over the radius grid and, for each eps, the ratio
// G(r + eps) / G(r). The vanishing-ratio verdict is a finite-grid
// surrogate: ratios at the top of the grid must fall below
// pass_threshold and still be decreasing there. Evidence, not proof;
// the full curve is reported alongside.
TailConditionReport check_tail_conditions(const Marginal& dist,
                                          const std::vector<double>& r_grid,
                                          const std::vector<double>& eps_grid,
                                          double pass_threshold,
                                          const QuadratureOptions& opts = {});

// E[h(X)] against the analytic law (atom plus density), splitting the
// integration at the provided breakpoints. Used by the moment
// operations above; exposed for tests and diagnostics.
double expect(const Marginal& dist, const std::function<double(double)>& h,
              const std::vector<double>& breakpoints,
              const QuadratureOptions& opts = {});

}  // namespace shrinklab
