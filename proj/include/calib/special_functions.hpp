#pragma once

// Special-function kernels used by the closed-form mean bounds: log-gamma,
// regularized incomplete gamma and beta functions, the standard normal
// distribution, and the corresponding quantile functions.
//
// Every routine is pure and reentrant. Domain violations throw
// std::domain_error.

namespace calib::special {

/// log Gamma(x) for x > 0 (Lanczos approximation, g = 7).
double log_gamma(double x);

/// Stirling remainder: log Gamma(x + 1) - [(x + 1/2) log x - x + log(2 pi)/2].
double stirling_error(double x);

/// x log(x / m) + m - x, evaluated without cancellation when x is close to m.
double deviance_term(double x, double m);

/// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Density of Gamma(shape a, scale 1) at x.
double gamma_pdf(double a, double x);

/// Regularized incomplete beta I_x(a, b) and its complement 1 - I_x(a, b).
double beta_inc(double a, double b, double x);
double beta_inc_complement(double a, double b, double x);

/// Density of Beta(a, b) at x.
double beta_pdf(double a, double b, double x);

/// Standard normal CDF Phi(x) and upper tail 1 - Phi(x).
double normal_cdf(double x);
double normal_sf(double x);

/// log Phi(x), accurate far into the lower tail.
double log_normal_cdf(double x);

/// Phi^{-1}(p) for 0 < p < 1; |Phi(result) - p| is at rounding level.
double quantile_std_normal(double p);

/// x with P(shape, x / scale) = p.
double quantile_gamma(double p, double shape, double scale = 1.0);

/// x with Q(shape, x / scale) = q, i.e. the (1 - q)-quantile without
/// forming 1 - q.
double quantile_gamma_upper(double q, double shape, double scale = 1.0);

/// x with I_x(a, b) = p.
double quantile_beta(double p, double a, double b);

/// x with 1 - I_x(a, b) = q.
double quantile_beta_upper(double q, double a, double b);

}  // namespace calib::special
