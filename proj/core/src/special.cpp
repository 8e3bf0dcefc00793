#include "shrinklab/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace shrinklab {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("normal_quantile: u must lie in (0, 1)");
  }
  // Solve normal_sf(x) = p for the smaller tail, then restore the sign.
  const bool upper = u > 0.5;
  const double p = upper ? 1.0 - u : u;

  // Initial guess: asymptotic inversion of the tail for small p, a
  // crude central linearization otherwise. Newton does the rest.
  double x;
  if (p < 0.02) {
    const double t = std::sqrt(-2.0 * std::log(p));
    const double adj =
        t * t - 2.0 * std::log(t) - std::log(2.0 * std::numbers::pi);
    x = adj > 1.0 ? std::sqrt(adj) : t;
  } else {
    x = (0.5 - p) * std::sqrt(2.0 * std::numbers::pi);
  }

  for (int it = 0; it < 100; ++it) {
    const double err = normal_sf(x) - p;
    const double d = normal_pdf(x);
    if (d <= 0.0) break;
    const double step = err / d;
    x += step;
    if (std::fabs(step) <= 1e-15 * (1.0 + std::fabs(x))) break;
  }
  return upper ? x : -x;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kFpMin = std::numeric_limits<double>::min() / kEps;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) return h;
  }
  throw std::runtime_error("regularized_incomplete_beta: no convergence");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("regularized_incomplete_beta: a, b must be > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_pdf(double x, double nu) {
  if (!(nu > 0.0)) throw std::domain_error("student_t_pdf: nu must be > 0");
  const double ln_norm = std::lgamma(0.5 * (nu + 1.0)) -
                         std::lgamma(0.5 * nu) -
                         0.5 * std::log(nu * std::numbers::pi);
  return std::exp(ln_norm -
                  0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double student_t_two_sided_tail(double t, double nu) {
  if (!(nu > 0.0)) throw std::domain_error("student_t_tail: nu must be > 0");
  if (t <= 0.0) return 1.0;
  return regularized_incomplete_beta(0.5 * nu, 0.5, nu / (nu + t * t));
}

double student_t_cdf(double x, double nu) {
  const double half_tail = 0.5 * student_t_two_sided_tail(std::fabs(x), nu);
  return x >= 0.0 ? 1.0 - half_tail : half_tail;
}

double student_t_quantile(double u, double nu) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("student_t_quantile: u must lie in (0, 1)");
  }
  if (u == 0.5) return 0.0;
  const bool upper = u > 0.5;
  const double p = upper ? 1.0 - u : u;  // lower-tail mass of |quantile|

  // Bracket the magnitude, then bisect/Newton on the cdf.
  double lo = 0.0;
  double hi = 1.0;
  while (0.5 * student_t_two_sided_tail(hi, nu) > p) {
    hi *= 2.0;
    if (hi > 1e300) break;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double err = 0.5 * student_t_two_sided_tail(x, nu) - p;
    if (err > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double d = student_t_pdf(x, nu);
    double next = x + err / d;  // cdf error equals -err at the upper point
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-14 * (1.0 + std::fabs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return upper ? x : -x;
}

}  // namespace shrinklab
