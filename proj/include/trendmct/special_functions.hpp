#pragma once

// Scalar distribution kernels used across the library. All functions are pure
// and thread-safe. Accuracy targets: ~1e-12 absolute for the cdfs in their
// bulk, which is far below every statistical tolerance used downstream.

namespace trendmct {

// Standard normal cumulative distribution function.
double norm_cdf(double x);

// Standard normal quantile (inverse cdf), accurate to ~1e-15 relative
// (rational minimax approximation, Wichura-style).
double norm_quantile(double p);

// Regularized incomplete beta function I_x(a, b) for a,b > 0, x in [0,1],
// by continued fraction with modified Lentz evaluation.
double reg_inc_beta(double x, double a, double b);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

// Student t cumulative distribution function with df > 0.
double t_cdf(double x, double df);

// Student t quantile; inverse of t_cdf in p, df > 0.
double t_quantile(double p, double df);

// F distribution cdf with d1, d2 > 0 degrees of freedom.
double f_cdf(double x, double d1, double d2);

// F distribution quantile (upper bracketing + bisection on f_cdf).
double f_quantile(double p, double d1, double d2);

// Chi distribution quantile: x such that P(chi_df <= x) = p. Used for the
// radial scaling step of the multivariate t integrator.
double chi_quantile(double p, double df);

}  // namespace trendmct
