#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shrinklab/marginals.hpp"
#include "shrinklab/processes.hpp"
#include "shrinklab/shrink.hpp"

namespace shrinklab {

// The centering constant m_r with its provenance: quadrature against
// the analytic marginal when one exists, otherwise a dedicated
// Monte Carlo pass whose standard error is reported.
struct MrEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool analytic = true;
};

MrEstimate shrunken_mean_for(const ProcessSpec& spec, ShrinkRadius r,
                             std::uint64_t seed,
                             std::int64_t mc_draws = 1 << 20);

struct SigmaEstimate {
  double value = 0.0;      // L2 norm of the centered shrunken sum
  double std_error = 0.0;  // delta-method error of the norm
  std::int64_t reps = 0;
};

// Monte Carlo estimate of || sum_{k=1..n} (shrink(X_k, r) - m_r) ||_2
// over independent replicate paths drawn from the given pool.
SigmaEstimate estimate_sigma(const ProcessSpec& spec, ShrinkRadius r,
                             std::int64_t n, std::int64_t reps,
                             std::uint64_t seed, int workers = 0,
                             StreamPurpose pool = StreamPurpose::kSolverPool);

struct BracketStep {
  double lo = 0.0;
  double hi = 0.0;
  double mid = 0.0;
  double sigma_mid = 0.0;
};

struct RnSolveResult {
  std::int64_t n = 0;
  double r_n = 0.0;
  double sigma_hat = 0.0;
  double sigma_se = 0.0;
  double sigma_at_zero = 0.0;
  std::int64_t reps = 0;
  double tol = 0.0;
  bool converged = false;
  MrEstimate m_r;
  std::vector<BracketStep> bracket_history;
};

// Normalization radius: the r at which the L2 norm of the centered
// shrunken sum equals 1, found by bisection over one fixed
// common-random-numbers replicate pool (the same path seeds for every
// trial r, which makes the estimated norm a continuous deterministic
// function of r). Throws PreconditionError when the norm at r = 0
// does not exceed 1 + tol, the empirical analogue of n being too
// small for the normalization to have a root.
RnSolveResult solve_rn(const ProcessSpec& spec, std::int64_t n, double tol,
                       std::int64_t reps, std::uint64_t seed,
                       int workers = 0);

// Independent realizations of the centered shrunken sum at radius r,
// drawn from a pool disjoint from the solver's.
std::vector<double> standardized_sums(const ProcessSpec& spec, std::int64_t n,
                                      ShrinkRadius r, std::int64_t reps,
                                      std::uint64_t seed, int workers = 0);

// Two-sided one-sample Kolmogorov-Smirnov distance between the sample
// and the reference cdf.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& reference_cdf);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

SampleMoments sample_moments(const std::vector<double>& sample);

struct LindebergRow {
  std::int64_t n = 0;
  double r_n = 0.0;
  double eps = 0.0;
  double value = 0.0;          // n * E[Y^2 1(|Y| >= eps)] at r = r(n)
  double envelope = 0.0;       // 8 n G(r(n) + eps/2), the analytic ceiling
};

// Lindeberg functional along the solved normalization radii; analytic
// marginals are evaluated by quadrature, others by Monte Carlo.
std::vector<LindebergRow> lindeberg_profile(const ProcessSpec& spec,
                                            const std::vector<std::int64_t>& n_grid,
                                            const std::vector<double>& eps_grid,
                                            std::int64_t reps,
                                            std::uint64_t seed,
                                            int workers = 0);

struct SandwichRow {
  std::int64_t n = 0;
  double lower = 0.0;      // n Var[X_0] (1 - rho*) / (1 + rho*)
  double upper = 0.0;      // n Var[X_0] (1 + rho*) / (1 - rho*)
  double estimate = 0.0;   // Monte Carlo E[(sum of centered X)^2]
  double est_se = 0.0;
  bool inside = false;     // within 3 standard errors of the band
};

struct SandwichReport {
  double rho_star_1 = 0.0;
  double var_x0 = 0.0;
  std::vector<SandwichRow> rows;
  bool all_inside = false;
};

// Certifies the two-sided partial-sum variance bounds implied by a
// declared interlaced lag-1 maximal correlation below 1. The
// cancellation chain is rejected: its coefficient equals 1 and no
// such bound exists.
SandwichReport variance_sandwich_check(const ProcessSpec& spec,
                                       double rho_star_1,
                                       const std::vector<std::int64_t>& n_grid,
                                       std::int64_t reps, std::uint64_t seed,
                                       int workers = 0);

struct CancellationReport {
  double lambda = 0.0;
  double theta = 0.0;
  double r = 0.0;
  std::int64_t n = 0;
  std::int64_t reps = 0;
  double empirical_zero_freq = 0.0;
  double freq_se = 0.0;
  double exact_rest_prob = 0.0;  // P(V_1 = V_n = 1) by matrix powers
  double lower_bound = 0.0;      // 1 - lambda
};

// Frequency of exactly-zero shrunken partial sums for the
// cancellation chain. The exact-zero test is sound: paths resting at
// both window ends cancel pairwise in floating point because each
// +Z/-Z excursion contributes shrink(z, r) - shrink(z, r) with the
// identical stored z.
CancellationReport cancellation_demo(double lambda, std::int64_t n,
                                     ShrinkRadius r, std::int64_t reps,
                                     std::uint64_t seed, int workers = 0);

struct CltStageResult {
  std::int64_t n = 0;
  RnSolveResult solve;
  SampleMoments moments;
  double ks_distance = 0.0;
  std::vector<LindebergRow> lindeberg;
  // Ratio of the realized squared norm to n Var[Y_{0, r(n)}]; bounded
  // away from 0 exactly when the partial-sum variance bounds hold.
  double sum_variance_ratio = 0.0;
};

struct CltOptions {
  std::vector<double> eps_grid = {0.25, 0.5, 1.0};
  double solver_tol = 0.01;
  std::int64_t solver_reps = 20000;
  std::vector<double> tail_r_grid = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  std::vector<double> tail_eps_grid = {0.5, 1.0};
  double tail_pass_threshold = 0.05;
};

struct CltReport {
  std::string process;
  TailConditionReport tail_gate;
  MixingMetadata mixing_gate;
  std::vector<CltStageResult> stages;
};

// Full pipeline per n: normalization solve, fresh standardized sums,
// KS distance against the standard normal cdf, sample moments, and
// the Lindeberg diagnostics. Rejects specs whose marginal fails the
// tail conditions or whose declared mixing metadata satisfies neither
// dependence condition.
CltReport clt_experiment(const ProcessSpec& spec,
                         const std::vector<std::int64_t>& n_grid,
                         std::int64_t reps, std::uint64_t seed,
                         int workers = 0, const CltOptions& options = {});

}  // namespace shrinklab
