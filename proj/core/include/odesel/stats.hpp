#pragma once

namespace odesel {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal CDF, accurate in both tails.
double normal_cdf(double x);

/// Inverse standard normal CDF for p in (0, 1).
/// Rational initial guess refined by one Halley step; absolute error is below
/// 1e-14 across the open interval.
double normal_quantile(double p);

}  // namespace odesel
