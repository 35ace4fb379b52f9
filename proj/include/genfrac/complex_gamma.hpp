#pragma once

// Complex Gamma function through a Lanczos approximation (g = 607/128,
// 15 terms) with the reflection formula for Re(z) < 1/2.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "genfrac/errors.hpp"

namespace genfrac {

namespace detail {

inline constexpr double lanczos_g_shift = 5.2421875; // g + 1/2

inline constexpr std::array<double, 15> lanczos_coefficients = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4, .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,  -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4, .36899182659531622704e-5};

inline Complex lgamma_right_half(Complex z) {
    Complex series = lanczos_coefficients[0];
    for (std::size_t j = 1; j < lanczos_coefficients.size(); ++j)
        series += lanczos_coefficients[j] / (z + static_cast<double>(j));
    const Complex t = z + lanczos_g_shift;
    constexpr double sqrt_two_pi = 2.5066282746310005024;
    return (z + 0.5) * std::log(t) - t + std::log(sqrt_two_pi * series / z);
}

} // namespace detail

/// Tolerance used to decide that an argument sits on a pole of Gamma.
inline constexpr double gamma_pole_tolerance = 1e-12;

/// True when z is (numerically) a non-positive integer.
inline bool is_gamma_pole(Complex z, double tol = gamma_pole_tolerance) {
    const double re = z.real();
    if (re > 0.5)
        return false;
    const double nearest = std::round(re);
    const double scale = std::max(1.0, std::abs(re));
    return std::abs(z.imag()) <= tol * scale && std::abs(re - nearest) <= tol * scale;
}

/// log Gamma(z) on some branch; exp(lgamma(z)) == Gamma(z).
inline Complex lgamma(Complex z) {
    if (is_gamma_pole(z))
        fail(ErrorKind::gamma_pole, "Gamma has a pole at " + std::to_string(z.real()));
    if (z.real() < 0.5) {
        constexpr double pi = std::numbers::pi;
        return std::log(Complex(pi)) - std::log(std::sin(pi * z)) - detail::lgamma_right_half(1.0 - z);
    }
    return detail::lgamma_right_half(z);
}

inline Complex gamma(Complex z) { return std::exp(lgamma(z)); }

/// 1/Gamma(z), entire: zero at the poles of Gamma.
inline Complex rgamma(Complex z) {
    if (is_gamma_pole(z))
        return 0.0;
    return std::exp(-lgamma(z));
}

/// Gamma(a)/Gamma(b) without intermediate overflow. Zero when b is a pole.
inline Complex gamma_ratio(Complex a, Complex b) {
    if (is_gamma_pole(b))
        return 0.0;
    if (is_gamma_pole(a))
        fail(ErrorKind::gamma_pole, "numerator Gamma argument is a pole");
    return std::exp(lgamma(a) - lgamma(b));
}

/// c * Gamma(z), evaluated in log space when Gamma(z) alone would overflow.
inline Complex scaled_gamma(Complex c, Complex z) {
    if (c == 0.0)
        return 0.0;
    const Complex lg = lgamma(z);
    if (lg.real() < 600.0)
        return c * std::exp(lg);
    return std::exp(std::log(c) + lg);
}

/// Rising factorial (a)_n.
inline Complex pochhammer(Complex a, std::size_t n) {
    Complex out = 1.0;
    for (std::size_t j = 0; j < n; ++j)
        out *= a + static_cast<double>(j);
    return out;
}

} // namespace genfrac
