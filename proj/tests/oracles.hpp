#pragma once

// Reference values computed independently of the library.

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// k-th positive zero of J_0: sign-change scan then bisection on std::cyl_bessel_j.
inline double bessel_j0_zero(int k) {
    int found = 0;
    double a = 0.5;
    for (double b = a + 0.05; b < 100.0; a = b, b += 0.05) {
        if (std::cyl_bessel_j(0.0, a) * std::cyl_bessel_j(0.0, b) > 0.0) continue;
        if (++found < k) continue;
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (a + b);
            (std::cyl_bessel_j(0.0, a) * std::cyl_bessel_j(0.0, m) <= 0.0 ? b : a) = m;
        }
        return 0.5 * (a + b);
    }
    throw std::runtime_error("bessel_j0_zero: not found");
}

/// Root of t tanh t = 1 by Newton's method.
inline double catenoid_neck() {
    double t = 1.2;
    for (int it = 0; it < 50; ++it) {
        const double c = std::cosh(t);
        t -= (t * std::tanh(t) - 1.0) / (std::tanh(t) + t / (c * c));
    }
    return t;
}

/// Boundary flux of the heat solution with unit data on the unit 3-ball:
/// 2 sum_{k>=1} exp(-k^2 pi^2 t).
inline double ball3_flux(double t) {
    double s = 0.0;
    for (int k = 1; k < 100000; ++k) {
        const double term = 2.0 * std::exp(-k * k * pi * pi * t);
        s += term;
        if (term < 1e-18 * s) break;
    }
    return s;
}

/// Same on the interval [0, L] with both ends Dirichlet: sum_{k odd} 2 exp(-(k pi / L)^2 t).
inline double interval_flux(double t, double L = 2.0, int max_modes = 100000) {
    double s = 0.0;
    for (int k = 1; k < 2 * max_modes; k += 2) {
        const double term = 2.0 * std::exp(-std::pow(k * pi / L, 2) * t);
        s += term;
        if (term < 1e-18 * s) break;
    }
    return s;
}

/// Exit time on the annulus a < |x| < b: v = (a^2 - x^2)/4 + C ln(x/a).
struct AnnulusExit {
    double a = 1.0;
    double b = 2.0;
    double C() const { return (b * b - a * a) / (4.0 * std::log(b / a)); }
    double inner_flux() const { return -a / 2.0 + C() / a; }
    double outer_flux() const { return b / 2.0 - C() / b; }
};

inline double rate(double coarse, double fine, double ratio = 2.0) { return std::log(coarse / fine) / std::log(ratio); }

// Frozen copies of the values above (double precision, computed once).
inline constexpr double kJ01Squared = 5.783185962946784;
inline constexpr double kJ02Squared = 30.471262343662087;
inline constexpr double kCatenoidNeck = 1.1996786402577433;
inline constexpr double kAnnulusInnerFlux = 0.58202128066672265;
inline constexpr double kAnnulusOuterFlux = 0.45898935966663867;

}  // namespace oracle
