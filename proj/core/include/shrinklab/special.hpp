#pragma once

// Scalar special functions used by the analytic marginals: standard
// normal pdf/cdf/quantile and the regularized incomplete beta (for
// Student-t tails).

namespace shrinklab {

double normal_pdf(double x);
double normal_cdf(double x);
// Upper tail P(Z > x), computed via erfc so it stays accurate far out.
double normal_sf(double x);
// Inverse of normal_cdf on (0, 1); Newton refinement on erfc, accurate
// to a few ulp over the whole open interval.
double normal_quantile(double u);

// Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

// Student-t with nu degrees of freedom.
double student_t_pdf(double x, double nu);
double student_t_two_sided_tail(double t, double nu);  // P(|X| > t), t >= 0
double student_t_cdf(double x, double nu);
double student_t_quantile(double u, double nu);

}  // namespace shrinklab
