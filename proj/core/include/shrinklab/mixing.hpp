#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "shrinklab/errors.hpp"

namespace shrinklab {

// Finite discrete joint law of a pair of random symbols, stored row
// major. Rows index the first coordinate, columns the second.
class JointDistribution {
 public:
  JointDistribution(int rows, int cols, std::vector<double> probabilities);

  static JointDistribution from_rows(
      const std::vector<std::vector<double>>& rows);
  static JointDistribution product(const std::vector<double>& row_marginal,
                                   const std::vector<double>& col_marginal);
  static JointDistribution from_csv(std::istream& in);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double at(int i, int j) const {
    return p_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
              static_cast<std::size_t>(j)];
  }
  std::vector<double> row_marginals() const;
  std::vector<double> col_marginals() const;
  std::string to_csv() const;

 private:
  int rows_;
  int cols_;
  std::vector<double> p_;
};

// Exact strong-mixing coefficient of the pair: the largest deviation
// |P(A x B) - P(A)P(B)| over all events A, B in the two coordinate
// sigma-fields, by enumeration over subsets of the smaller alphabet.
// Alphabets above 16 symbols per side are refused.
double alpha_coefficient(const JointDistribution& joint);

// Exact maximal correlation of the two coordinates: the largest
// singular value of the centered standardized matrix
// (p_ij - p_i. p_.j) / sqrt(p_i. p_.j), equivalently the second
// singular value of the uncentered kernel. Zero-mass rows/columns are
// dropped; a single-atom side yields 0.
double rho_coefficient(const JointDistribution& joint);

struct MixingReport {
  double alpha = 0.0;
  double rho = 0.0;
  int lag = 0;
  std::string notes;
};

// Exact joint law of (V_0, V_n) for the hidden cancellation chain at
// the given lag: entries pi_i (P^n)_{ij}.
JointDistribution chain_lagged_joint(double theta, std::uint64_t lag);

struct RhoDecayPoint {
  std::uint64_t lag = 0;
  double rho = 0.0;
};

struct RhoDecayReport {
  std::vector<RhoDecayPoint> points;
  // Least-squares fit of log rho against the lag over [fit_from, fit_to];
  // rate = exp(slope).
  double fitted_rate = 0.0;
  double log_r_squared = 0.0;
  std::uint64_t fit_from = 0;
  std::uint64_t fit_to = 0;
};

// rho between the time-0 and time-n coordinates of the hidden chain
// for lags 1..max_lag. The geometric fit skips lag 1, where the
// deterministic 2 -> 3 step pins rho at exactly 1.
RhoDecayReport chain_rho_decay(double theta, std::uint64_t max_lag);

// Correlation of the excursion-entry indicator {X_-1 = 0, X_0 != 0}
// and the excursion-exit indicator {X_1 != 0, X_2 = 0} for the
// cancellation chain, computed exactly over the path measure of the
// window V_-1..V_2. The two events coincide up to null sets (state 2
// is entered only from 1 and forces 3 then 1), so this returns 1 for
// every lambda.
double excursion_boundary_correlation(double lambda);

}  // namespace shrinklab
