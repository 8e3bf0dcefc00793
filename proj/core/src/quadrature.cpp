#include "shrinklab/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace shrinklab {

namespace {

struct SimpsonState {
  const std::function<double(double)>* f;
  double abs_tol;
  double rel_tol;
};

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const SimpsonState& st, double a, double b, double fa, double fm,
             double fb, double whole, double abs_budget, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = (*st.f)(lm);
  const double frm = (*st.f)(rm);
  if (!std::isfinite(flm) || !std::isfinite(frm)) {
    throw QuadratureError("adaptive_simpson: non-finite integrand value");
  }
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  const double tol =
      std::max(abs_budget, st.rel_tol * std::fabs(left + right));
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adapt(st, a, m, fa, flm, fm, left, 0.5 * abs_budget, depth - 1) +
         adapt(st, m, b, fm, frm, fb, right, 0.5 * abs_budget, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const QuadratureOptions& opts) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm)) {
    throw QuadratureError("adaptive_simpson: non-finite integrand value");
  }
  SimpsonState st{&f, opts.abs_tol, opts.rel_tol};
  const double whole = simpson(fa, fm, fb, b - a);
  return adapt(st, a, b, fa, fm, fb, whole, opts.abs_tol, opts.max_depth);
}

double integrate_piecewise(const std::function<double(double)>& f, double a,
                           double b, const std::vector<double>& breakpoints,
                           const QuadratureOptions& opts) {
  if (a >= b) return 0.0;
  std::vector<double> pts;
  pts.push_back(a);
  for (double p : breakpoints) {
    if (p > a && p < b) pts.push_back(p);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    total += adaptive_simpson(f, pts[i], pts[i + 1], opts);
  }
  return total;
}

HalfLineResult integrate_half_line(const std::function<double(double)>& f,
                                   double start,
                                   const QuadratureOptions& opts) {
  // Segment endpoints: start + 1, start + 2, start + 4, ...
  constexpr int kMaxDoublings = 60;
  constexpr int kDivergenceHorizon = 28;  // span > ~2.7e8 by then
  constexpr double kDecayFactor = 0.9;

  HalfLineResult out;
  double seg_lo = start;
  double span = 1.0;
  double prev_seg = -1.0;
  int stubborn = 0;  // consecutive segments failing to decay
  for (int k = 0; k < kMaxDoublings; ++k) {
    const double seg_hi = start + span;
    const double seg = adaptive_simpson(f, seg_lo, seg_hi, opts);
    out.value += seg;
    out.truncation = seg_hi;
    const double stop_tol =
        std::max(opts.abs_tol, opts.rel_tol * std::fabs(out.value));
    if (std::fabs(seg) <= stop_tol) {
      return out;
    }
    if (prev_seg >= 0.0 && std::fabs(seg) >= kDecayFactor * prev_seg) {
      ++stubborn;
    } else {
      stubborn = 0;
    }
    if (k >= kDivergenceHorizon && stubborn >= 3) {
      out.divergent = true;
      return out;
    }
    prev_seg = std::fabs(seg);
    seg_lo = seg_hi;
    span *= 2.0;
  }
  throw QuadratureError(
      "integrate_half_line: neither convergence nor divergence evidence "
      "after exhausting the truncation budget");
}

}  // namespace shrinklab
