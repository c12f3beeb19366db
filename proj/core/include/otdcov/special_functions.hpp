#pragma once

namespace otdcov {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
/// Series expansion for x < a + 1, Lentz continued fraction otherwise;
/// converges well below 1e-12 absolute error over the ranges used here.
double regularized_gamma_p(double a, double x);

/// Chi-square CDF with d degrees of freedom: P(d/2, x/2).
double chi2_cdf(double x, int d);

/// Chi-square quantile by monotone bisection against chi2_cdf.
/// Requires 0 <= p < 1.
double chi2_quantile(double p, int d);

}  // namespace otdcov
