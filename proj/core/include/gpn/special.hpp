#pragma once

namespace gpn {

// Log-gamma, digamma and trigamma for x > 0, accurate to ~1e-12 relative
// error on [1e-3, 1e6]. Arguments below the series threshold are shifted up
// by the recurrence Gamma(x+1) = x Gamma(x) (and its derivatives), then an
// 8-term asymptotic expansion is evaluated at the shifted point.
double lgamma(double x);
double digamma(double x);
double trigamma(double x);

}  // namespace gpn
