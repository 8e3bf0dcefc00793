#include "shrinklab/mixing.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "shrinklab/processes.hpp"

namespace shrinklab {

namespace {
constexpr double kMassTolerance = 1e-12;
constexpr int kMaxAlphabet = 16;
}  // namespace

JointDistribution::JointDistribution(int rows, int cols,
                                     std::vector<double> probabilities)
    : rows_(rows), cols_(cols), p_(std::move(probabilities)) {
  if (rows_ < 1 || cols_ < 1) {
    throw ConfigError("JointDistribution: alphabets must be non-empty");
  }
  if (p_.size() != static_cast<std::size_t>(rows_) *
                       static_cast<std::size_t>(cols_)) {
    throw ConfigError("JointDistribution: matrix size mismatch");
  }
  double mass = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("JointDistribution: entries must be >= 0 and finite");
    }
    mass += v;
  }
  if (std::fabs(mass - 1.0) > kMassTolerance) {
    throw ConfigError("JointDistribution: total mass deviates from 1");
  }
}

JointDistribution JointDistribution::from_rows(
    const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ConfigError("JointDistribution: no rows");
  const int c = static_cast<int>(rows.front().size());
  std::vector<double> flat;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) {
      throw ConfigError("JointDistribution: ragged rows");
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return JointDistribution(static_cast<int>(rows.size()), c, std::move(flat));
}

JointDistribution JointDistribution::product(
    const std::vector<double>& row_marginal,
    const std::vector<double>& col_marginal) {
  std::vector<double> flat;
  flat.reserve(row_marginal.size() * col_marginal.size());
  for (double u : row_marginal) {
    for (double v : col_marginal) flat.push_back(u * v);
  }
  return JointDistribution(static_cast<int>(row_marginal.size()),
                           static_cast<int>(col_marginal.size()),
                           std::move(flat));
}

JointDistribution JointDistribution::from_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("JointDistribution: non-numeric CSV cell '" + cell +
                          "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return from_rows(rows);
}

std::vector<double> JointDistribution::row_marginals() const {
  std::vector<double> out(static_cast<std::size_t>(rows_), 0.0);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out[static_cast<std::size_t>(i)] += at(i, j);
  }
  return out;
}

std::vector<double> JointDistribution::col_marginals() const {
  std::vector<double> out(static_cast<std::size_t>(cols_), 0.0);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out[static_cast<std::size_t>(j)] += at(i, j);
  }
  return out;
}

std::string JointDistribution::to_csv() const {
  std::string out;
  char buf[32];
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", at(i, j));
      out += buf;
      out += (j + 1 < cols_) ? ',' : '\n';
    }
  }
  return out;
}

double alpha_coefficient(const JointDistribution& joint) {
  int a = joint.rows();
  int b = joint.cols();
  if (a > kMaxAlphabet || b > kMaxAlphabet) {
    throw ConfigError(
        "alpha_coefficient: alphabet above 16 symbols per side; exact "
        "enumeration refused, use declared bounds instead");
  }
  // Enumerate subsets of the smaller side; for a fixed A the optimal B
  // collects the columns with positive slack d_j = P(A x {j}) - P(A) p_.j,
  // so alpha = max_A sum_j max(d_j, 0).
  const bool transpose = b < a;
  const int na = transpose ? b : a;
  const int nb = transpose ? a : b;
  const auto cell = [&](int i, int j) {
    return transpose ? joint.at(j, i) : joint.at(i, j);
  };
  std::vector<double> arow(static_cast<std::size_t>(na), 0.0);
  std::vector<double> bcol(static_cast<std::size_t>(nb), 0.0);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      arow[static_cast<std::size_t>(i)] += cell(i, j);
      bcol[static_cast<std::size_t>(j)] += cell(i, j);
    }
  }
  double best = 0.0;
  const std::uint32_t full = (na >= 32) ? 0xFFFFFFFFu
                                        : ((1u << na) - 1u);
  std::vector<double> colsum(static_cast<std::size_t>(nb));
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    double pa = 0.0;
    std::fill(colsum.begin(), colsum.end(), 0.0);
    for (int i = 0; i < na; ++i) {
      if (!(mask >> i & 1u)) continue;
      pa += arow[static_cast<std::size_t>(i)];
      for (int j = 0; j < nb; ++j) {
        colsum[static_cast<std::size_t>(j)] += cell(i, j);
      }
    }
    double pos = 0.0;
    for (int j = 0; j < nb; ++j) {
      const double d = colsum[static_cast<std::size_t>(j)] -
                       pa * bcol[static_cast<std::size_t>(j)];
      if (d > 0.0) pos += d;
    }
    best = std::max(best, pos);
  }
  return best;
}

double rho_coefficient(const JointDistribution& joint) {
  const auto prow = joint.row_marginals();
  const auto pcol = joint.col_marginals();
  std::vector<int> ri;
  std::vector<int> ci;
  for (int i = 0; i < joint.rows(); ++i) {
    if (prow[static_cast<std::size_t>(i)] > 0.0) ri.push_back(i);
  }
  for (int j = 0; j < joint.cols(); ++j) {
    if (pcol[static_cast<std::size_t>(j)] > 0.0) ci.push_back(j);
  }
  if (ri.size() < 2 || ci.size() < 2) return 0.0;  // a degenerate side

  Eigen::MatrixXd q(ri.size(), ci.size());
  for (std::size_t i = 0; i < ri.size(); ++i) {
    const double pr = prow[static_cast<std::size_t>(ri[i])];
    for (std::size_t j = 0; j < ci.size(); ++j) {
      const double pc = pcol[static_cast<std::size_t>(ci[j])];
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (joint.at(ri[i], ci[j]) - pr * pc) / std::sqrt(pr * pc);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q);
  const double rho = svd.singularValues()(0);
  return std::min(rho, 1.0);
}

JointDistribution chain_lagged_joint(double theta, std::uint64_t lag) {
  if (lag < 1) throw ConfigError("chain_lagged_joint: lag must be >= 1");
  const auto pi = stationary_chain_dist(theta);
  const auto pn = TransitionMatrix::for_theta(theta).power(lag);
  std::vector<double> flat;
  flat.reserve(9);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      flat.push_back(pi[static_cast<std::size_t>(i)] *
                     pn[static_cast<std::size_t>(i)]
                       [static_cast<std::size_t>(j)]);
    }
  }
  return JointDistribution(3, 3, std::move(flat));
}

RhoDecayReport chain_rho_decay(double theta, std::uint64_t max_lag) {
  if (max_lag < 1) throw ConfigError("chain_rho_decay: max_lag must be >= 1");
  RhoDecayReport rep;
  rep.points.reserve(max_lag);
  for (std::uint64_t lag = 1; lag <= max_lag; ++lag) {
    rep.points.push_back({lag, rho_coefficient(chain_lagged_joint(theta, lag))});
  }
  rep.fit_from = std::min<std::uint64_t>(2, max_lag);
  rep.fit_to = max_lag;

  // Least squares of log rho on the lag over the fit window.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (const auto& pt : rep.points) {
    if (pt.lag < rep.fit_from || pt.lag > rep.fit_to || !(pt.rho > 0.0)) {
      continue;
    }
    const double x = static_cast<double>(pt.lag);
    const double y = std::log(pt.rho);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * sxx - sx * sx;
    const double slope = (count * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / count;
    rep.fitted_rate = std::exp(slope);
    double ss_res = 0.0, ss_tot = 0.0;
    const double ymean = sy / count;
    for (const auto& pt : rep.points) {
      if (pt.lag < rep.fit_from || pt.lag > rep.fit_to || !(pt.rho > 0.0)) {
        continue;
      }
      const double y = std::log(pt.rho);
      const double yhat = intercept + slope * static_cast<double>(pt.lag);
      ss_res += (y - yhat) * (y - yhat);
      ss_tot += (y - ymean) * (y - ymean);
    }
    rep.log_r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  }
  return rep;
}

double excursion_boundary_correlation(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ConfigError(
        "excursion_boundary_correlation: lambda must lie in (0, 1)");
  }
  const double theta = lambda / 4.0;
  const auto pi = stationary_chain_dist(theta);
  const auto t = TransitionMatrix::for_theta(theta);

  // Exact expectation over the window (V_-1, V_0, V_1, V_2); X_k = 0
  // exactly when V_k = 1.
  double e1 = 0.0, e2 = 0.0, e12 = 0.0;
  for (int v0 = 1; v0 <= 3; ++v0) {
    for (int v1 = 1; v1 <= 3; ++v1) {
      for (int v2 = 1; v2 <= 3; ++v2) {
        for (int v3 = 1; v3 <= 3; ++v3) {
          const double w = pi[static_cast<std::size_t>(v0 - 1)] *
                           t.p[static_cast<std::size_t>(v0 - 1)]
                              [static_cast<std::size_t>(v1 - 1)] *
                           t.p[static_cast<std::size_t>(v1 - 1)]
                              [static_cast<std::size_t>(v2 - 1)] *
                           t.p[static_cast<std::size_t>(v2 - 1)]
                              [static_cast<std::size_t>(v3 - 1)];
          if (w == 0.0) continue;
          const bool entry = (v0 == 1) && (v1 != 1);   // X_-1 = 0, X_0 != 0
          const bool exit = (v2 != 1) && (v3 == 1);    // X_1 != 0, X_2 = 0
          if (entry) e1 += w;
          if (exit) e2 += w;
          if (entry && exit) e12 += w;
        }
      }
    }
  }
  const double var1 = e1 * (1.0 - e1);
  const double var2 = e2 * (1.0 - e2);
  if (!(var1 > 0.0) || !(var2 > 0.0)) {
    throw NumericError("excursion_boundary_correlation: degenerate indicator");
  }
  return (e12 - e1 * e2) / std::sqrt(var1 * var2);
}

}  // namespace shrinklab
