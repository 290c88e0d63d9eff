#pragma once

// Integer-order Bessel functions J0, J1, Y0, Y1 of real argument and the
// Hankel functions of the second kind built from them.
//
// Below kAsymptoticThreshold the J sequence comes from Miller's backward
// recurrence normalized with J0 + 2*sum J_2k = 1, and Y0/Y1 from Neumann
// expansions over that sequence. Above it the Hankel asymptotic expansions
// are used; their smallest term there is below 1e-20.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "borntomo/errors.hpp"

namespace borntomo::specfun {

using cplx = std::complex<double>;

inline constexpr double kAsymptoticThreshold = 25.0;

namespace detail {

inline constexpr int kMaxOrder = 96;

struct BesselJSequence {
    std::array<double, kMaxOrder + 1> j{};
    int last = 0;
};

/// J_0..J_m(x) for 0 < x < kAsymptoticThreshold by backward recurrence.
inline BesselJSequence bessel_j_sequence(double x) {
    BesselJSequence seq;
    int m = 2 * static_cast<int>((x + 52.0) / 2.0);
    if (m > kMaxOrder) m = kMaxOrder;
    seq.last = m;
    auto& v = seq.j;
    double next = 0.0;
    double cur = 1e-30;
    v[m] = cur;
    for (int k = m; k >= 1; --k) {
        double prev = (2.0 * k / x) * cur - next;
        next = cur;
        cur = prev;
        v[k - 1] = cur;
        if (std::abs(cur) > 1e250) {
            for (int i = k - 1; i <= m; ++i) v[i] *= 1e-250;
            next *= 1e-250;
            cur *= 1e-250;
        }
    }
    double norm = v[0];
    for (int k = 2; k <= m; k += 2) norm += 2.0 * v[k];
    for (int k = 0; k <= m; ++k) v[k] /= norm;
    return seq;
}

/// Hankel asymptotic amplitudes P, Q for order nu at large x.
inline void hankel_asymptotic(int nu, double x, double& p, double& q) {
    const double mu = 4.0 * nu * nu;
    p = 1.0;
    q = 0.0;
    double term = 1.0;
    double prev_abs = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * 8.0 * x);
        const double a = std::abs(term);
        if (a > prev_abs) break; // asymptotic series: stop at the smallest term
        prev_abs = a;
        // a_k / x^k enters with sign (-1)^{floor(k/2)}, alternating between Q (odd) and P (even)
        const double signed_term = ((k / 2) % 2 == 0) ? term : -term;
        if (k % 2 == 1) q += signed_term; else p += signed_term;
        if (a < 1e-22) break;
    }
}

inline void check_positive(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw Error(ErrorKind::domain, std::string(name) + ": argument must be finite and > 0");
}

inline constexpr double kEulerGamma = 0.57721566490153286060651209;

struct BesselPair {
    double j0, j1, y0, y1;
};

inline BesselPair bessel_all(double x) {
    using std::numbers::pi;
    BesselPair r{};
    if (x >= kAsymptoticThreshold) {
        const double amp = std::sqrt(2.0 / (pi * x));
        double p0, q0, p1, q1;
        hankel_asymptotic(0, x, p0, q0);
        hankel_asymptotic(1, x, p1, q1);
        const double chi0 = x - 0.25 * pi;
        const double chi1 = x - 0.75 * pi;
        const double c0 = std::cos(chi0), s0 = std::sin(chi0);
        const double c1 = std::cos(chi1), s1 = std::sin(chi1);
        r.j0 = amp * (p0 * c0 - q0 * s0);
        r.y0 = amp * (p0 * s0 + q0 * c0);
        r.j1 = amp * (p1 * c1 - q1 * s1);
        r.y1 = amp * (p1 * s1 + q1 * c1);
        return r;
    }
    const auto seq = bessel_j_sequence(x);
    const auto& j = seq.j;
    r.j0 = j[0];
    r.j1 = j[1];
    const double lg = std::log(0.5 * x) + kEulerGamma;
    // Y0 = (2/pi)(ln(x/2)+gamma) J0 - (4/pi) sum_{k>=1} (-1)^k J_2k / k
    double s = 0.0;
    for (int k = 1; 2 * k <= seq.last; ++k) s += ((k % 2) ? -1.0 : 1.0) * j[2 * k] / k;
    r.y0 = (2.0 / pi) * (lg * j[0] - 2.0 * s);
    // Y1 = -(2/(pi x)) J0 + (2/pi)(ln(x/2)+gamma-1) J1
    //      - (2/pi) sum_{k>=1} (-1)^k (2k+1) J_{2k+1} / (k(k+1))
    double t = 0.0;
    for (int k = 1; 2 * k + 1 <= seq.last; ++k)
        t += ((k % 2) ? -1.0 : 1.0) * (2.0 * k + 1.0) * j[2 * k + 1] / (static_cast<double>(k) * (k + 1));
    r.y1 = -(2.0 / (pi * x)) * j[0] + (2.0 / pi) * ((lg - 1.0) * j[1] - t);
    return r;
}

} // namespace detail

inline double bessel_j0(double x) {
    if (!std::isfinite(x) || x < 0.0) throw Error(ErrorKind::domain, "bessel_j0: argument must be finite and >= 0");
    if (x == 0.0) return 1.0;
    return detail::bessel_all(x).j0;
}

inline double bessel_j1(double x) {
    if (!std::isfinite(x) || x < 0.0) throw Error(ErrorKind::domain, "bessel_j1: argument must be finite and >= 0");
    if (x == 0.0) return 0.0;
    return detail::bessel_all(x).j1;
}

inline double bessel_y0(double x) {
    detail::check_positive(x, "bessel_y0");
    return detail::bessel_all(x).y0;
}

inline double bessel_y1(double x) {
    detail::check_positive(x, "bessel_y1");
    return detail::bessel_all(x).y1;
}

/// H0^(2)(x) = J0(x) - j Y0(x)
inline cplx hankel2_0(double x) {
    detail::check_positive(x, "hankel2_0");
    const auto b = detail::bessel_all(x);
    return {b.j0, -b.y0};
}

/// H1^(2)(x) = J1(x) - j Y1(x)
inline cplx hankel2_1(double x) {
    detail::check_positive(x, "hankel2_1");
    const auto b = detail::bessel_all(x);
    return {b.j1, -b.y1};
}

} // namespace borntomo::specfun
