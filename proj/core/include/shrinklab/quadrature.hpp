#pragma once

#include <functional>
#include <vector>

#include "shrinklab/errors.hpp"

namespace shrinklab {

class QuadratureError : public NumericError {
 public:
  explicit QuadratureError(const std::string& what) : NumericError(what) {}
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_depth = 48;
};

// Adaptive Simpson on [a, b]. The relative part of the tolerance is
// applied per subinterval, so small-magnitude integrands keep their
// relative accuracy.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const QuadratureOptions& opts = {});

// Integrates over [a, b] split at the given interior breakpoints
// (kinks and indicator edges), clipping breakpoints to the range.
double integrate_piecewise(const std::function<double(double)>& f, double a,
                           double b, const std::vector<double>& breakpoints,
                           const QuadratureOptions& opts = {});

struct HalfLineResult {
  double value = 0.0;
  bool divergent = false;
  double truncation = 0.0;  // upper endpoint actually reached
};

// Integrates f over [start, infinity) by doubling segments until the
// segment contributions fall below tolerance. Declares divergence when
// contributions refuse to decay after the truncation horizon has grown
// large, instead of silently returning a truncated value.
HalfLineResult integrate_half_line(const std::function<double(double)>& f,
                                   double start,
                                   const QuadratureOptions& opts = {});

}  // namespace shrinklab
