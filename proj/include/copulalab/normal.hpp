#pragma once

namespace copulalab {

double normal_pdf(double x);
double normal_cdf(double x);

// Inverse of the standard normal CDF (Wichura's PPND16 rational
// approximations, accurate to ~1e-16 on (0,1)).
double normal_quantile(double p);

// P(X <= h, Y <= k) for standard bivariate normal with correlation rho,
// |rho| <= 0.999. Deterministic panelled Gauss-Legendre quadrature of the
// Plackett identity, absolute error below 1e-12 on the supported range.
double bivariate_normal_cdf(double h, double k, double rho);

}  // namespace copulalab
