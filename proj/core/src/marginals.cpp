#include "shrinklab/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shrinklab/errors.hpp"
#include "shrinklab/special.hpp"

namespace shrinklab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_param(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

Marginal standard_normal() { return normal(0.0, 1.0); }

Marginal normal(double mu, double sd) {
  if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mu)) {
    throw ConfigError("normal: sd must be positive and parameters finite");
  }
  Marginal m;
  m.name = "normal(" + format_param(mu) + "," + format_param(sd) + ")";
  m.family = MarginalFamily::kNormal;
  m.params = {mu, sd};
  m.tail = [mu, sd](double t) {
    // P(|X| > t) for X ~ N(mu, sd^2)
    return normal_sf((t - mu) / sd) + normal_sf((t + mu) / sd);
  };
  m.density = [mu, sd](double x) { return normal_pdf((x - mu) / sd) / sd; };
  m.quantile = [mu, sd](double u) { return mu + sd * normal_quantile(u); };
  m.mean = mu;
  m.symmetric = (mu == 0.0);
  m.second_moment = sd * sd + mu * mu;
  m.sampler = [mu, sd](const RngStream& s, std::uint64_t index) {
    return mu + sd * s.normal(index, 1);
  };
  return m;
}

Marginal laplace(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError("laplace: rate must be positive and finite");
  }
  Marginal m;
  m.name = "laplace(" + format_param(rate) + ")";
  m.family = MarginalFamily::kLaplace;
  m.params = {rate};
  m.tail = [rate](double t) { return std::exp(-rate * t); };
  m.density = [rate](double x) {
    return 0.5 * rate * std::exp(-rate * std::fabs(x));
  };
  m.quantile = [rate](double u) {
    return u < 0.5 ? std::log(2.0 * u) / rate : -std::log(2.0 * (1.0 - u)) / rate;
  };
  m.mean = 0.0;
  m.symmetric = true;
  m.second_moment = 2.0 / (rate * rate);
  m.sampler = [rate, q = m.quantile](const RngStream& s,
                                     std::uint64_t index) {
    return q(s.uniform(index, 0));
  };
  return m;
}

Marginal student_t(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw ConfigError("student_t: nu must be positive and finite");
  }
  Marginal m;
  m.name = "student_t(" + format_param(nu) + ")";
  m.family = MarginalFamily::kStudentT;
  m.params = {nu};
  m.tail = [nu](double t) { return student_t_two_sided_tail(t, nu); };
  m.density = [nu](double x) { return student_t_pdf(x, nu); };
  m.quantile = [nu](double u) { return student_t_quantile(u, nu); };
  m.mean = 0.0;  // principal-value center; undefined for nu <= 1
  m.symmetric = true;
  m.second_moment = nu > 2.0 ? nu / (nu - 2.0) : kInf;
  m.sampler = [nu](const RngStream& s, std::uint64_t index) {
    return student_t_quantile(s.uniform(index, 0), nu);
  };
  return m;
}

Marginal zero_inflated_normal(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("zero_inflated_normal: p must lie in [0, 1)");
  }
  Marginal m;
  m.name = "zero_inflated_normal(" + format_param(p) + ")";
  m.family = MarginalFamily::kZeroInflatedNormal;
  m.params = {p};
  const double w = 1.0 - p;
  m.tail = [w](double t) { return w * 2.0 * normal_sf(t); };
  m.density = [w](double x) { return w * normal_pdf(x); };
  m.atom_at_zero = p;
  m.quantile = [p, w](double u) {
    const double lo = 0.5 * w;  // F(0-) mass
    if (u < lo) return normal_quantile(u / w);
    if (u <= lo + p) return 0.0;
    return normal_quantile((u - p) / w);
  };
  m.mean = 0.0;
  m.symmetric = true;
  m.second_moment = w;
  m.sampler = [p](const RngStream& s, std::uint64_t index) {
    if (s.uniform(index, 0) < p) return 0.0;
    return s.normal(index, 1);
  };
  return m;
}

Marginal point_mass_zero() {
  Marginal m;
  m.name = "point_mass(0)";
  m.family = MarginalFamily::kPointMassZero;
  m.tail = [](double) { return 0.0; };
  m.atom_at_zero = 1.0;
  m.quantile = [](double) { return 0.0; };
  m.mean = 0.0;
  m.symmetric = true;
  m.second_moment = 0.0;
  m.sampler = [](const RngStream&, std::uint64_t) { return 0.0; };
  return m;
}

double g_function(const Marginal& dist, ShrinkRadius r,
                  const QuadratureOptions& opts) {
  const double rv = r.value();
  // Per-segment Simpson runs relative-tolerance controlled so tiny
  // tail functionals keep relative accuracy.
  QuadratureOptions seg{1e-16, opts.rel_tol, opts.max_depth};
  const auto integrand = [&dist, rv](double t) { return t * dist.tail(t + rv); };
  HalfLineResult res = integrate_half_line(integrand, 0.0, seg);
  if (res.divergent) return kInf;
  return res.value;
}

double shrunken_second_moment(const Marginal& dist, ShrinkRadius r,
                              const QuadratureOptions& opts) {
  const double g = g_function(dist, r, opts);
  if (!std::isfinite(g)) {
    throw PreconditionError("shrunken_second_moment: infinite tail "
                            "functional, moment undefined for " + dist.name);
  }
  return 2.0 * g;
}

double expect(const Marginal& dist, const std::function<double(double)>& h,
              const std::vector<double>& breakpoints,
              const QuadratureOptions& opts) {
  double total = dist.atom_at_zero * h(0.0);
  if (dist.atom_at_zero >= 1.0) return total;
  if (!dist.has_density()) {
    throw UnsupportedDistributionError(
        "expect: no density available for " + dist.name);
  }
  // Integration range from the quantile function; the mass outside is
  // below 1e-15 for the built-in light-tailed laws.
  constexpr double kTailMass = 1e-15;
  const double lo = dist.quantile(kTailMass);
  const double hi = dist.quantile(1.0 - kTailMass);
  const auto f = [&](double x) { return h(x) * dist.density(x); };
  return total + integrate_piecewise(f, lo, hi, breakpoints, opts);
}

double shrunken_mean(const Marginal& dist, ShrinkRadius r,
                     const QuadratureOptions& opts) {
  if (dist.symmetric) return 0.0;  // odd map of a symmetric law
  const double rv = r.value();
  return expect(
      dist, [rv](double x) { return shrink(x, rv); }, {-rv, rv}, opts);
}

double shrunken_variance_ratio(const Marginal& dist, ShrinkRadius r,
                               const QuadratureOptions& opts) {
  const double m2 = shrunken_second_moment(dist, r, opts);
  if (!(m2 > 0.0)) {
    throw PreconditionError(
        "shrunken_variance_ratio: shrink(X, r) is degenerate for " +
        dist.name);
  }
  const double m = shrunken_mean(dist, r, opts);
  return (m2 - m * m) / m2;
}

double lindeberg_tail(const Marginal& dist, ShrinkRadius r, double eps,
                      const QuadratureOptions& opts) {
  if (!(eps > 0.0)) {
    throw ConfigError("lindeberg_tail: eps must be positive");
  }
  // Mirrors the precondition of the moment operations: infinite tail
  // functional has no Lindeberg quantity either.
  (void)shrunken_second_moment(dist, r, opts);
  const double rv = r.value();
  const double m = shrunken_mean(dist, r, opts);

  // Region {|shrink(x, r) - m| >= eps} is two rays; the map is
  // monotone and piecewise linear, so the edges solve
  // shrink(x, r) = m + eps and shrink(x, r) = m - eps.
  const double c = m + eps;
  const double upper_start = c > 0.0 ? rv + c : (c < 0.0 ? -rv + c : -rv);
  const double d = m - eps;
  const double lower_end = d < 0.0 ? -rv + d : (d > 0.0 ? rv + d : rv);

  double total = 0.0;
  if (dist.atom_at_zero > 0.0 && std::fabs(0.0 - m) >= eps) {
    total += dist.atom_at_zero * m * m;
  }
  if (!dist.has_density()) {
    if (dist.atom_at_zero >= 1.0) return total;
    throw UnsupportedDistributionError(
        "lindeberg_tail: no density available for " + dist.name);
  }
  constexpr double kTailMass = 1e-15;
  const double lo = dist.quantile(kTailMass);
  const double hi = dist.quantile(1.0 - kTailMass);
  const auto f = [&](double x) {
    const double y = shrink(x, rv) - m;
    return y * y * dist.density(x);
  };
  if (lower_end > lo) {
    total += integrate_piecewise(f, lo, std::min(lower_end, hi), {-rv, rv},
                                 opts);
  }
  if (upper_start < hi) {
    total += integrate_piecewise(f, std::max(upper_start, lo), hi, {-rv, rv},
                                 opts);
  }
  return total;
}

TailConditionReport check_tail_conditions(const Marginal& dist,
                                          const std::vector<double>& r_grid,
                                          const std::vector<double>& eps_grid,
                                          double pass_threshold,
                                          const QuadratureOptions& opts) {
  if (r_grid.empty() || eps_grid.empty()) {
    throw ConfigError("check_tail_conditions: grids must be non-empty");
  }
  if (!std::is_sorted(r_grid.begin(), r_grid.end()) ||
      !std::is_sorted(eps_grid.begin(), eps_grid.end())) {
    throw ConfigError("check_tail_conditions: grids must be increasing");
  }

  TailConditionReport rep;
  rep.g_values.reserve(r_grid.size());
  bool positive_finite = true;
  for (double r : r_grid) {
    const double g = g_function(dist, r, opts);
    rep.g_values.push_back(g);
    if (!(g > 0.0) || !std::isfinite(g)) positive_finite = false;
  }
  rep.holds_positivity = positive_finite;

  std::ostringstream diag;
  if (!positive_finite) {
    diag << "tail functional not strictly positive and finite on the grid; ";
    rep.holds_ratio_vanishes = false;
  }

  // Ratios G(r + eps) / G(r) over the radius grid.
  bool all_eps_pass = positive_finite;
  for (double eps : eps_grid) {
    std::vector<double> ratios;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
      if (!positive_finite) break;
      const double g_r = rep.g_values[i];
      const double g_re = g_function(dist, r_grid[i] + eps, opts);
      const double ratio = g_re / g_r;
      ratios.push_back(ratio);
      rep.ratio_curve.push_back({r_grid[i], eps, ratio});
    }
    if (!positive_finite) continue;
    // Surrogate for the vanishing limit: the last ratio must be under
    // the threshold and the top of the grid must still be heading
    // down (a genuine decrease, not float noise).
    const std::size_t top = std::min<std::size_t>(3, ratios.size());
    bool decreasing = true;
    for (std::size_t i = ratios.size() - top; i + 1 < ratios.size(); ++i) {
      if (!(ratios[i + 1] < ratios[i] * (1.0 - 1e-3))) decreasing = false;
    }
    const bool below = ratios.back() < pass_threshold;
    if (!(below && decreasing)) {
      all_eps_pass = false;
      diag << "eps=" << eps << ": top ratio " << ratios.back()
           << (below ? "" : " not below threshold")
           << (decreasing ? "" : " not decreasing") << "; ";
    }
  }
  rep.holds_ratio_vanishes = positive_finite && all_eps_pass;
  if (rep.holds_positivity && rep.holds_ratio_vanishes) {
    diag << "grid surrogate passed at threshold " << pass_threshold;
  }
  rep.diagnostics = diag.str();
  return rep;
}

}  // namespace shrinklab
