#pragma once

namespace mixplan {

// Standard normal distribution function Phi.
double gaussian_cdf(double x);

// Standard normal density phi.
double gaussian_pdf(double x);

// Inverse of gaussian_cdf; z_q with Phi(z_q) = q. Throws ValidationError
// unless 0 < q < 1.
double gaussian_quantile(double q);

// Upper tail 1 - Phi(x), computed without cancellation.
double gaussian_upper(double x);

}  // namespace mixplan
