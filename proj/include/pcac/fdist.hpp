#pragma once

namespace pcac {

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Solves I_x(a, b) = prob for x. Throws NumericalFailure if the safeguarded
/// Newton iteration does not converge.
double inverse_incomplete_beta(double a, double b, double prob);

/// CDF of the F-distribution with (d1, d2) degrees of freedom.
double f_cdf(double d1, double d2, double x);

/// Quantile of the F-distribution: returns x with f_cdf(d1, d2, x) == prob.
/// prob must lie in the open unit interval.
double inverse_f_cdf(double d1, double d2, double prob);

}  // namespace pcac
