#pragma once

// Standard normal distribution helpers used throughout the library.
//
// Probabilities are kept on the ordinary scale. phi_bar is evaluated through
// erfc, which keeps full relative precision deep into the upper tail; z_of
// starts from Acklam's rational approximation and polishes with one Halley
// step against phi_bar.

namespace overrun {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Standard normal density.
double normal_pdf(double z);

// Phi(z), the standard normal distribution function.
double phi(double z);

// Upper tail 1 - Phi(z).
double phi_bar(double z);

// Upper-tail quantile: the z with phi_bar(z) == u. Throws DomainError unless
// 0 < u < 1.
double z_of(double u);

// Two-sided p-value from a one-sided one: min(1, 2 min(p, 1 - p)).
double two_sided(double p);

}  // namespace overrun
