#include "overrun/numerics.hpp"

#include <array>
#include <cmath>
#include <string>

#include "overrun/errors.hpp"

namespace overrun {

namespace {

// Acklam's rational approximation to the lower-tail quantile, relative error
// below 1.2e-9 before refinement.
constexpr std::array<double, 6> kA = {-3.969683028665376e+01, 2.209460984245205e+02,
                                      -2.759285104469687e+02, 1.383577518672690e+02,
                                      -3.066479806614716e+01, 2.506628277459239e+00};
constexpr std::array<double, 5> kB = {-5.447609879822406e+01, 1.615858368580409e+02,
                                      -1.556989798598866e+02, 6.680131188771972e+01,
                                      -1.328068155288572e+01};
constexpr std::array<double, 6> kC = {-7.784894002430293e-03, -3.223964580411365e-01,
                                      -2.400758277161838e+00, -2.549732539343734e+00,
                                      4.374664141464968e+00,  2.938163982698783e+00};
constexpr std::array<double, 4> kD = {7.784695709041462e-03, 3.224671290700398e-01,
                                      2.445134137142996e+00, 3.754408661907416e+00};

double lower_quantile_approx(double p) {
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
               ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
               (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
}

}  // namespace

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double phi(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double phi_bar(double z) { return 0.5 * std::erfc(z * M_SQRT1_2); }

double z_of(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("z_of: argument must lie in (0, 1), got " + std::to_string(u));
    }
    if (u == 0.5) return 0.0;
    // Work in whichever tail keeps u itself exact.
    double z = -lower_quantile_approx(u);
    const double e = phi_bar(z) - u;
    const double g = e / normal_pdf(z);
    // Halley step for phi_bar(z) = u.
    z += g / (1.0 - 0.5 * z * g);
    return z;
}

double two_sided(double p) {
    const double tail = p < 1.0 - p ? p : 1.0 - p;
    const double doubled = 2.0 * tail;
    return doubled < 1.0 ? doubled : 1.0;
}

}  // namespace overrun
