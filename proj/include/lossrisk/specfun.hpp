#pragma once

namespace lossrisk::specfun {

// ln Gamma(x) for x > 0.  Lanczos approximation with reflection below 0.5.
// Throws std::domain_error for x <= 0 or non-finite x.
double log_gamma(double x);

// Psi(x) = d/dx ln Gamma(x), x > 0.  Recurrence shift to x > 6 followed by
// the asymptotic series; absolute error below 1e-12 over (0, 1e6].
double digamma(double x);

// Psi'(x), x > 0.  Same shift-plus-asymptotic-series scheme as digamma.
double trigamma(double x);

// ln (alpha)_m = ln Gamma(alpha+m) - ln Gamma(alpha), for alpha > 0 and
// alpha + m > 0.  Integer m up to +-64 is evaluated as a product in log
// space, which keeps full precision for the Gamma-ratio constants used by
// the estimator catalog even at large alpha.
double log_pochhammer(double alpha, double m);

}  // namespace lossrisk::specfun
