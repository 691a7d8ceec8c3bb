#pragma once

namespace tiebreak {

// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
// Series expansion for x < s + 1, Lentz continued fraction otherwise.
double gamma_p(double s, double x);

// Standard normal CDF and its inverse. The inverse uses Acklam's rational
// approximation polished with one Halley step (absolute error ~1e-15).
double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace tiebreak
