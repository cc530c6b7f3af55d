#pragma once

namespace devminer::special {

/// Standard normal CDF.
double normal_cdf(double z);

/// Upper tail 1 - normal_cdf(z), accurate for large z.
double normal_sf(double z);

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Upper tail P(F > f) of the F distribution with (d1, d2) degrees of freedom.
double f_sf(double f, double d1, double d2);

}  // namespace devminer::special
