#pragma once

#include <cmath>
#include <stdexcept>

namespace shrinklab {

// Nonnegative dead-zone radius of the shrinking map, in the same
// units as the signal.
class ShrinkRadius {
 public:
  ShrinkRadius(double r) : r_(r) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw std::domain_error("ShrinkRadius: radius must be finite and >= 0");
    }
  }
  double value() const { return r_; }

 private:
  double r_;
};

namespace detail {
inline void require_finite(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("shrink: input must be finite");
  }
}
}  // namespace detail

// Soft-threshold map: x - r above the dead zone, x + r below it,
// exactly 0 on [-r, r] (both branches agree at |x| = r).
inline double shrink(double x, ShrinkRadius r) {
  detail::require_finite(x);
  const double rv = r.value();
  if (x > rv) return x - rv;
  if (x < -rv) return x + rv;
  return 0.0;
}

// max(|x| - r, 0); equals |shrink(x, r)|.
inline double shrink_magnitude(double x, ShrinkRadius r) {
  detail::require_finite(x);
  const double m = std::fabs(x) - r.value();
  return m > 0.0 ? m : 0.0;
}

}  // namespace shrinklab
