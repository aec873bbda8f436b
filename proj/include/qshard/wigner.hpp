#pragma once

#include <array>
#include <cmath>

#include "qshard/gates.hpp"

namespace qshard {

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Wigner small-d matrix element d^j_{m'm}(beta) for half-integer spins,
/// indices passed as doubled values (two_j = 2j, two_mp = 2m', two_m = 2m).
inline double small_d(int two_j, int two_mp, int two_m, double beta) {
    const double c = std::cos(beta / 2.0);
    const double s = std::sin(beta / 2.0);
    const int jpm = (two_j + two_m) / 2;   // j + m
    const int jmm = (two_j - two_m) / 2;   // j - m
    const int jpmp = (two_j + two_mp) / 2; // j + m'
    const int jmmp = (two_j - two_mp) / 2; // j - m'
    const double prefactor =
        std::sqrt(factorial(jpm) * factorial(jmm) * factorial(jpmp) * factorial(jmmp));
    double sum = 0.0;
    for (int k = 0;; ++k) {
        const int a = jpm - k;            // (j + m - k)!
        const int b = jmmp - k;           // (j - m' - k)!
        const int c2 = k + (two_mp - two_m) / 2; // (k + m' - m)!
        if (a < 0 || b < 0) break;
        if (c2 < 0) continue;
        const double sign = (c2 % 2 == 0) ? 1.0 : -1.0;
        const double denom = factorial(a) * factorial(b) * factorial(k) * factorial(c2);
        sum += sign / denom * std::pow(c, a + b) * std::pow(s, k + c2);
    }
    return prefactor * sum;
}

} // namespace detail

/// 2x2 Wigner rotation for spin 1/2:
/// D^j_{m'm}(alpha, beta, gamma) = exp(-i m' alpha) d^j_{m'm}(beta) exp(-i m gamma),
/// basis |0> = m = +1/2, |1> = m = -1/2. Unitary for any angles.
inline Gate2 wigner_d2(double alpha, double beta, double gamma) {
    static constexpr int two_m[2] = {1, -1};
    Gate2 g;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            const double d = detail::small_d(1, two_m[r], two_m[c], beta);
            const double phase = -0.5 * (two_m[r] * alpha + two_m[c] * gamma);
            g.m[r][c] = d * cxd(std::cos(phase), std::sin(phase));
        }
    return g;
}

/// 4x4 Wigner rotation for spin 3/2, basis |00>,|01>,|10>,|11> mapped to
/// m = 3/2, 1/2, -1/2, -3/2.
inline Gate4 wigner_d4(double alpha, double beta, double gamma) {
    static constexpr int two_m[4] = {3, 1, -1, -3};
    Gate4 g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const double d = detail::small_d(3, two_m[r], two_m[c], beta);
            const double phase = -0.5 * (two_m[r] * alpha + two_m[c] * gamma);
            g.m[r][c] = d * cxd(std::cos(phase), std::sin(phase));
        }
    return g;
}

} // namespace qshard
