#include "shrinklab/clt_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "shrinklab/errors.hpp"
#include "shrinklab/parallel.hpp"
#include "shrinklab/special.hpp"

namespace shrinklab {

namespace {

// Per-replicate centered shrunken sums over a fixed seed pool. Sums
// are accumulated left to right within each path; results land in
// slots indexed by replicate, so the later reduction is worker-count
// independent.
std::vector<double> replicate_sums(const ProcessSpec& spec, double r,
                                   double m_r, std::int64_t n,
                                   std::int64_t reps, std::uint64_t seed,
                                   StreamPurpose pool, int workers) {
  std::vector<double> sums(static_cast<std::size_t>(reps));
  parallel_for(reps, workers, [&](std::int64_t begin, std::int64_t end) {
    std::vector<double> path;
    const ShrinkRadius radius(r);
    for (std::int64_t rep = begin; rep < end; ++rep) {
      const std::uint64_t rep_seed = derive_replicate_seed(
          seed, pool, static_cast<std::uint64_t>(rep));
      generate_path(spec, n, rep_seed, path);
      double s = 0.0;
      for (double x : path) s += shrink(x, radius);
      sums[static_cast<std::size_t>(rep)] = s - static_cast<double>(n) * m_r;
    }
  });
  return sums;
}

SigmaEstimate sigma_from_sums(const std::vector<double>& sums) {
  SigmaEstimate est;
  est.reps = static_cast<std::int64_t>(sums.size());
  double mean_sq = 0.0;
  for (double s : sums) mean_sq += s * s;
  mean_sq /= static_cast<double>(sums.size());
  double var_sq = 0.0;
  for (double s : sums) {
    const double d = s * s - mean_sq;
    var_sq += d * d;
  }
  var_sq /= static_cast<double>(sums.size());
  est.value = std::sqrt(mean_sq);
  if (est.value > 0.0) {
    // delta method: se(sqrt(M)) = se(M) / (2 sqrt(M))
    est.std_error =
        std::sqrt(var_sq / static_cast<double>(sums.size())) /
        (2.0 * est.value);
  }
  return est;
}

double mc_lindeberg(const ProcessSpec& spec, double r, double m_r, double eps,
                    std::int64_t draws, std::uint64_t seed, int workers) {
  std::vector<double> acc(static_cast<std::size_t>(draws));
  parallel_for(draws, workers, [&](std::int64_t begin, std::int64_t end) {
    std::vector<double> path;
    const ShrinkRadius radius(r);
    for (std::int64_t i = begin; i < end; ++i) {
      const std::uint64_t s = derive_replicate_seed(
          seed, StreamPurpose::kMeanEstimate, static_cast<std::uint64_t>(i));
      generate_path(spec, 1, s, path);
      const double y = shrink(path[0], radius) - m_r;
      acc[static_cast<std::size_t>(i)] =
          std::fabs(y) >= eps ? y * y : 0.0;
    }
  });
  double total = 0.0;
  for (double v : acc) total += v;
  return total / static_cast<double>(draws);
}

}  // namespace

MrEstimate shrunken_mean_for(const ProcessSpec& spec, ShrinkRadius r,
                             std::uint64_t seed, std::int64_t mc_draws) {
  MrEstimate est;
  try {
    const Marginal marginal = x0_marginal(spec);
    est.value = shrunken_mean(marginal, r);
    est.std_error = 0.0;
    est.analytic = true;
    return est;
  } catch (const UnsupportedDistributionError&) {
    // fall through to the Monte Carlo pass
  }
  est.analytic = false;
  std::vector<double> vals(static_cast<std::size_t>(mc_draws));
  parallel_for(mc_draws, 0, [&](std::int64_t begin, std::int64_t end) {
    std::vector<double> path;
    for (std::int64_t i = begin; i < end; ++i) {
      const std::uint64_t s = derive_replicate_seed(
          seed, StreamPurpose::kMeanEstimate, static_cast<std::uint64_t>(i));
      generate_path(spec, 1, s, path);
      vals[static_cast<std::size_t>(i)] = shrink(path[0], r);
    }
  });
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(mc_draws);
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= static_cast<double>(mc_draws);
  est.value = mean;
  est.std_error = std::sqrt(var / static_cast<double>(mc_draws));
  return est;
}

SigmaEstimate estimate_sigma(const ProcessSpec& spec, ShrinkRadius r,
                             std::int64_t n, std::int64_t reps,
                             std::uint64_t seed, int workers,
                             StreamPurpose pool) {
  if (reps < 100) throw ConfigError("estimate_sigma: reps must be >= 100");
  if (n < 1) throw ConfigError("estimate_sigma: n must be >= 1");
  const MrEstimate m_r = shrunken_mean_for(spec, r, seed);
  const auto sums =
      replicate_sums(spec, r.value(), m_r.value, n, reps, seed, pool, workers);
  return sigma_from_sums(sums);
}

RnSolveResult solve_rn(const ProcessSpec& spec, std::int64_t n, double tol,
                       std::int64_t reps, std::uint64_t seed, int workers) {
  if (!(tol > 0.0)) throw ConfigError("solve_rn: tol must be positive");
  if (reps < 100) throw ConfigError("solve_rn: reps must be >= 100");
  if (n < 1) throw ConfigError("solve_rn: n must be >= 1");

  RnSolveResult result;
  result.n = n;
  result.reps = reps;
  result.tol = tol;

  // One fixed pool of replicate seeds serves every candidate radius:
  // common random numbers make sigma_hat(r) continuous in r, so
  // bisection against a noisy target becomes sound.
  const auto sigma_at = [&](double r) {
    const MrEstimate m = shrunken_mean_for(spec, ShrinkRadius(r), seed);
    const auto sums = replicate_sums(spec, r, m.value, n, reps, seed,
                                     StreamPurpose::kSolverPool, workers);
    return sigma_from_sums(sums);
  };

  const SigmaEstimate at_zero = sigma_at(0.0);
  result.sigma_at_zero = at_zero.value;
  if (!(at_zero.value > 1.0 + tol)) {
    std::ostringstream os;
    os << "solve_rn: n below threshold; the centered-sum norm at r = 0 is "
       << at_zero.value << " which does not exceed 1 + tol = " << 1.0 + tol
       << " (n = " << n << ")";
    throw PreconditionError(os.str());
  }

  // Upper bracket: the norm decays to 0 as r grows.
  double lo = 0.0;
  double hi = 1.0;
  SigmaEstimate at_hi = sigma_at(hi);
  int doublings = 0;
  while (at_hi.value >= 1.0 && doublings < 90) {
    lo = hi;
    hi *= 2.0;
    at_hi = sigma_at(hi);
    ++doublings;
  }
  if (at_hi.value >= 1.0) {
    throw NumericError("solve_rn: failed to bracket the unit norm from above");
  }

  constexpr int kMaxIterations = 200;
  for (int it = 0; it < kMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const SigmaEstimate at_mid = sigma_at(mid);
    result.bracket_history.push_back({lo, hi, mid, at_mid.value});
    if (std::fabs(at_mid.value - 1.0) <= tol) {
      result.r_n = mid;
      result.sigma_hat = at_mid.value;
      result.sigma_se = at_mid.std_error;
      result.converged = true;
      result.m_r = shrunken_mean_for(spec, ShrinkRadius(mid), seed);
      return result;
    }
    if (at_mid.value > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  std::ostringstream os;
  os << "solve_rn: no convergence in " << kMaxIterations
     << " bisection steps; last bracket [" << lo << ", " << hi << "]";
  throw NumericError(os.str());
}

std::vector<double> standardized_sums(const ProcessSpec& spec, std::int64_t n,
                                      ShrinkRadius r, std::int64_t reps,
                                      std::uint64_t seed, int workers) {
  if (reps < 1) throw ConfigError("standardized_sums: reps must be >= 1");
  const MrEstimate m_r = shrunken_mean_for(spec, r, seed);
  return replicate_sums(spec, r.value(), m_r.value, n, reps, seed,
                        StreamPurpose::kEvalPool, workers);
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& reference_cdf) {
  if (sample.empty()) throw ConfigError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double m = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = reference_cdf(sample[i]);
    const double lo = f - static_cast<double>(i) / m;
    const double hi = static_cast<double>(i + 1) / m - f;
    d = std::max(d, std::max(lo, hi));
  }
  return d;
}

SampleMoments sample_moments(const std::vector<double>& sample) {
  SampleMoments mo;
  const double m = static_cast<double>(sample.size());
  if (sample.empty()) return mo;
  for (double v : sample) mo.mean += v;
  mo.mean /= m;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : sample) {
    const double d = v - mo.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= m;
  m3 /= m;
  m4 /= m;
  mo.variance = m2;
  if (m2 > 0.0) {
    mo.skewness = m3 / std::pow(m2, 1.5);
    mo.kurtosis = m4 / (m2 * m2);
  }
  return mo;
}

std::vector<LindebergRow> lindeberg_profile(
    const ProcessSpec& spec, const std::vector<std::int64_t>& n_grid,
    const std::vector<double>& eps_grid, std::int64_t reps,
    std::uint64_t seed, int workers) {
  if (n_grid.empty() || eps_grid.empty()) {
    throw ConfigError("lindeberg_profile: grids must be non-empty");
  }
  std::vector<LindebergRow> rows;
  bool analytic = true;
  Marginal marginal;
  try {
    marginal = x0_marginal(spec);
  } catch (const UnsupportedDistributionError&) {
    analytic = false;
  }
  for (std::int64_t n : n_grid) {
    const RnSolveResult solve = solve_rn(spec, n, 0.01, reps, seed, workers);
    const ShrinkRadius radius(solve.r_n);
    for (double eps : eps_grid) {
      LindebergRow row;
      row.n = n;
      row.r_n = solve.r_n;
      row.eps = eps;
      if (analytic) {
        row.value = static_cast<double>(n) *
                    lindeberg_tail(marginal, radius, eps);
        row.envelope = 8.0 * static_cast<double>(n) *
                       g_function(marginal, ShrinkRadius(solve.r_n + eps / 2.0));
      } else {
        row.value = static_cast<double>(n) *
                    mc_lindeberg(spec, solve.r_n, solve.m_r.value, eps,
                                 1 << 20, seed, workers);
        row.envelope = std::numeric_limits<double>::quiet_NaN();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

SandwichReport variance_sandwich_check(const ProcessSpec& spec,
                                       double rho_star_1,
                                       const std::vector<std::int64_t>& n_grid,
                                       std::int64_t reps, std::uint64_t seed,
                                       int workers) {
  if (std::holds_alternative<CancellationChainSpec>(spec.kind)) {
    throw PreconditionError(
        "variance_sandwich_check: inapplicable for the cancellation chain; "
        "its interlaced lag-1 maximal correlation equals 1, so no two-sided "
        "partial-sum variance bound exists");
  }
  if (!(rho_star_1 >= 0.0 && rho_star_1 < 1.0)) {
    throw PreconditionError(
        "variance_sandwich_check: declared rho*(1) must lie in [0, 1)");
  }
  if (n_grid.empty()) {
    throw ConfigError("variance_sandwich_check: n_grid must be non-empty");
  }

  const Marginal marginal = x0_marginal(spec);
  const double var_x0 =
      marginal.second_moment - marginal.mean * marginal.mean;
  SandwichReport rep;
  rep.rho_star_1 = rho_star_1;
  rep.var_x0 = var_x0;
  rep.all_inside = true;
  const double shrink_factor = (1.0 - rho_star_1) / (1.0 + rho_star_1);

  for (std::int64_t n : n_grid) {
    // Centered raw variables: radius 0 keeps the observation intact.
    const auto sums = replicate_sums(spec, 0.0, marginal.mean, n, reps, seed,
                                     StreamPurpose::kEvalPool, workers);
    double mean_sq = 0.0;
    for (double s : sums) mean_sq += s * s;
    mean_sq /= static_cast<double>(sums.size());
    double var_sq = 0.0;
    for (double s : sums) {
      const double d = s * s - mean_sq;
      var_sq += d * d;
    }
    var_sq /= static_cast<double>(sums.size());
    SandwichRow row;
    row.n = n;
    row.estimate = mean_sq;
    row.est_se = std::sqrt(var_sq / static_cast<double>(sums.size()));
    row.lower = static_cast<double>(n) * var_x0 * shrink_factor;
    row.upper = static_cast<double>(n) * var_x0 / shrink_factor;
    row.inside = (row.estimate + 3.0 * row.est_se >= row.lower) &&
                 (row.estimate - 3.0 * row.est_se <= row.upper);
    rep.all_inside = rep.all_inside && row.inside;
    rep.rows.push_back(row);
  }
  return rep;
}

CancellationReport cancellation_demo(double lambda, std::int64_t n,
                                     ShrinkRadius r, std::int64_t reps,
                                     std::uint64_t seed, int workers) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ConfigError("cancellation_demo: lambda must lie in (0, 1)");
  }
  if (n < 1 || reps < 1) {
    throw ConfigError("cancellation_demo: n and reps must be >= 1");
  }
  CancellationReport rep;
  rep.lambda = lambda;
  rep.theta = lambda / 4.0;
  rep.r = r.value();
  rep.n = n;
  rep.reps = reps;
  rep.lower_bound = 1.0 - lambda;

  const ProcessSpec spec{CancellationChainSpec{lambda}, std::nullopt};
  std::vector<unsigned char> zero(static_cast<std::size_t>(reps), 0);
  parallel_for(reps, workers, [&](std::int64_t begin, std::int64_t end) {
    std::vector<double> path;
    std::vector<int> states;
    for (std::int64_t repi = begin; repi < end; ++repi) {
      const std::uint64_t rep_seed = derive_replicate_seed(
          seed, StreamPurpose::kEvalPool, static_cast<std::uint64_t>(repi));
      generate_path(spec, n, rep_seed, path, &states);
      // Left-to-right summation: within a resting-to-resting window the
      // +Z/-Z pairs are adjacent, so each pair collapses to exactly 0.
      double s = 0.0;
      for (double x : path) s += shrink(x, r);
      zero[static_cast<std::size_t>(repi)] = (s == 0.0) ? 1 : 0;
    }
  });
  std::int64_t zeros = 0;
  for (unsigned char z : zero) zeros += z;
  rep.empirical_zero_freq =
      static_cast<double>(zeros) / static_cast<double>(reps);
  rep.freq_se = std::sqrt(std::max(
      rep.empirical_zero_freq * (1.0 - rep.empirical_zero_freq), 0.0) /
      static_cast<double>(reps));

  const auto pi = stationary_chain_dist(rep.theta);
  const auto pn1 = TransitionMatrix::for_theta(rep.theta).power(
      static_cast<std::uint64_t>(n - 1));
  rep.exact_rest_prob = pi[0] * pn1[0][0];
  return rep;
}

CltReport clt_experiment(const ProcessSpec& spec,
                         const std::vector<std::int64_t>& n_grid,
                         std::int64_t reps, std::uint64_t seed, int workers,
                         const CltOptions& options) {
  if (n_grid.empty()) {
    throw ConfigError("clt_experiment: n_grid must be non-empty");
  }
  CltReport report;
  report.process = spec.describe();

  // Gate 1: the marginal must carry a strictly positive finite tail
  // functional whose eps-shifted ratio vanishes (grid surrogate).
  const Marginal marginal = x0_marginal(spec);
  report.tail_gate =
      check_tail_conditions(marginal, options.tail_r_grid,
                            options.tail_eps_grid, options.tail_pass_threshold);
  if (!report.tail_gate.holds_positivity ||
      !report.tail_gate.holds_ratio_vanishes) {
    throw PreconditionError(
        "clt_experiment: tail-condition gate rejected " + spec.describe() +
        "; " + report.tail_gate.diagnostics);
  }

  // Gate 2: declared mixing metadata must satisfy one of the two
  // dependence conditions.
  report.mixing_gate = spec.mixing();
  if (!report.mixing_gate.satisfies_rho_summability() &&
      !report.mixing_gate.satisfies_interlaced_condition()) {
    throw PreconditionError(
        "clt_experiment: mixing-metadata gate rejected " + spec.describe() +
        "; neither the summable-rho condition nor the interlaced condition "
        "is declared (" + report.mixing_gate.provenance + ")");
  }

  for (std::int64_t n : n_grid) {
    CltStageResult stage;
    stage.n = n;
    stage.solve = solve_rn(spec, n, options.solver_tol,
                           std::max(reps, options.solver_reps), seed, workers);
    const ShrinkRadius radius(stage.solve.r_n);
    const auto sums = standardized_sums(spec, n, radius, reps, seed, workers);
    stage.moments = sample_moments(sums);
    stage.ks_distance = ks_statistic(sums, [](double x) {
      return normal_cdf(x);
    });
    const double var_y =
        shrunken_second_moment(marginal, radius) -
        stage.solve.m_r.value * stage.solve.m_r.value;
    for (double eps : options.eps_grid) {
      LindebergRow row;
      row.n = n;
      row.r_n = stage.solve.r_n;
      row.eps = eps;
      row.value =
          static_cast<double>(n) * lindeberg_tail(marginal, radius, eps);
      row.envelope =
          8.0 * static_cast<double>(n) *
          g_function(marginal, ShrinkRadius(stage.solve.r_n + eps / 2.0));
      stage.lindeberg.push_back(row);
    }
    const double mean_sq = stage.moments.variance +
                           stage.moments.mean * stage.moments.mean;
    stage.sum_variance_ratio =
        mean_sq / (static_cast<double>(n) * var_y);
    report.stages.push_back(std::move(stage));
  }
  return report;
}

}  // namespace shrinklab
