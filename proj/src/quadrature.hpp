#pragma once

// Internal helpers shared by the two engines.

#include <cmath>
#include <vector>

namespace overrun::detail {

// Composite Simpson weights for n (odd) equally spaced nodes.
inline std::vector<double> simpson_weights(int n, double h) {
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    if (n == 1) {
        w[0] = 0.0;
        return w;
    }
    for (int i = 0; i < n; ++i) {
        const double c = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[static_cast<std::size_t>(i)] = c * h / 3.0;
    }
    return w;
}

// Smallest odd integer >= n.
inline int odd_at_least(int n) { return n % 2 == 1 ? n : n + 1; }

// Sum over j in [first, last] of g[j] * exp(-(d0 - (j - first) h)^2 / (2 s^2)),
// where d0 is the offset of node `first`. The Gaussian factors are generated by
// a two-term multiplicative recurrence so the loop needs no calls to exp.
inline double gaussian_sum(const double* g, int first, int last, double d0, double h,
                           double sigma) {
    if (last < first) return 0.0;
    const double inv2s2 = 0.5 / (sigma * sigma);
    double e = std::exp(-d0 * d0 * inv2s2);
    double r = std::exp((2.0 * d0 * h - h * h) * inv2s2);
    const double q = std::exp(-2.0 * h * h * inv2s2);
    double acc = 0.0;
    for (int j = first; j <= last; ++j) {
        acc += g[j] * e;
        e *= r;
        r *= q;
    }
    return acc;
}

}  // namespace overrun::detail
