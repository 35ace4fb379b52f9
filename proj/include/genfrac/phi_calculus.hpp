#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "genfrac/chart.hpp"
#include "genfrac/complex_gamma.hpp"
#include "genfrac/errors.hpp"
#include "genfrac/quadrature.hpp"
#include "genfrac/test_function.hpp"

namespace genfrac {

/// How operators evaluate: closed forms where available, or forced.
enum class EvalMode { automatic, closed_form, quadrature };

/// An operator on functions of y defined for y in [lower, upper].
struct BaseOperator {
    std::function<Complex(const std::function<Complex(double)>&, double)> apply;
    double lower = 0.0;
    double upper = 0.0;
};

/// x -> (op (u o phi^{-1}))(phi(x)).
inline TestFunction conjugate_apply(const PhiChart& chart, BaseOperator op, const TestFunction& u) {
    const double lo = chart.phi_a();
    const double hi = chart.unbounded() ? std::numeric_limits<double>::infinity() : chart.phi_b();
    const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::isfinite(hi) ? std::abs(hi) : 0.0});
    require(op.lower <= lo + slack && op.upper >= hi - slack, ErrorKind::domain_mismatch,
            "operator domain does not cover [phi(a), phi(b)]");
    auto inv = chart.inv;
    auto phi = chart.phi;
    std::function<Complex(double)> pulled = [u, inv](double y) { return u(inv(y)); };
    return TestFunction::analytic([op = std::move(op), pulled, phi](double x) { return op.apply(pulled, phi(x)); });
}

/// Classical RL integral of order alpha based at y0, on [y0, y1], by quadrature.
inline BaseOperator rl_integral_operator(Complex alpha, double y0, double y1) {
    require(alpha.real() > 0.0, ErrorKind::order_not_positive, "RL integral needs Re(alpha) > 0");
    BaseOperator op;
    op.lower = y0;
    op.upper = y1;
    op.apply = [alpha, y0](const std::function<Complex(double)>& v, double y) -> Complex {
        return integrate_offset([&](double, double w) { return v(y0 + w); }, alpha, y - y0) * rgamma(alpha);
    };
    return op;
}

namespace detail {

inline void check_point(const PhiChart& chart, double x) {
    require(x >= chart.a && x <= chart.b, ErrorKind::domain_mismatch, "x lies outside the chart domain");
}

inline bool is_nonneg_real_integer(Complex z) {
    return z.imag() == 0.0 && z.real() >= 0.0 && z.real() == std::floor(z.real());
}

// Finite-difference derivatives carry ~1e-9 noise, so the order check is relaxed.
inline QuadratureOptions derivative_quadrature(const PhiChart& chart, const TestFunction& u, int n) {
    QuadratureOptions opt;
    if (!u.exact_phi_derivative(chart, n))
        opt.rel_tol = 1e-5;
    return opt;
}

inline bool use_closed_form(const PhiChart& chart, const TestFunction& u, EvalMode mode) {
    const bool available = u.is_power_sum_on(chart);
    if (mode == EvalMode::closed_form)
        require(available, ErrorKind::precondition, "closed form needs a phi-power-sum on this chart");
    return available && mode != EvalMode::quadrature;
}

// Order-nu differintegral of a power sum: c w^p -> c Gamma(p+1)/Gamma(p+1-nu) w^{p-nu}.
inline std::vector<PowerTerm> power_sum_differintegral(std::span<const PowerTerm> terms, Complex nu) {
    std::vector<PowerTerm> out;
    out.reserve(terms.size());
    for (const PowerTerm& t : terms) {
        const Complex factor = gamma_ratio(t.exponent + 1.0, t.exponent + 1.0 - nu);
        if (factor != 0.0)
            out.push_back({t.coeff * factor, t.exponent - nu});
    }
    return out;
}

inline Complex sum_power_terms(std::span<const PowerTerm> terms, double w) {
    Complex acc{};
    for (const PowerTerm& t : terms)
        acc += t.coeff * offset_power(w, t.exponent);
    return acc;
}

} // namespace detail

/// I^alpha_phi as a function: a power sum when u is one on this chart.
inline TestFunction rl_integral_function(const PhiChart& chart, Complex alpha, const TestFunction& u);

/// (1/Gamma(alpha)) integral_a^x phi'(t) (phi(x) - phi(t))^{alpha-1} u(t) dt.
inline Complex rl_integral_wrt(const PhiChart& chart, Complex alpha, const TestFunction& u, double x,
                               EvalMode mode = EvalMode::automatic) {
    require(alpha.real() > 0.0, ErrorKind::order_not_positive, "RL integral needs Re(alpha) > 0");
    detail::check_point(chart, x);
    if (x == chart.a)
        return 0.0;
    const double w = chart.phi(x) - chart.phi_a();
    if (detail::use_closed_form(chart, u, mode))
        return detail::sum_power_terms(detail::power_sum_differintegral(u.terms(), -alpha), w);
    return integrate_offset([&](double, double v) { return u.at_offset(chart, v); }, alpha, w) * rgamma(alpha);
}

inline TestFunction rl_integral_function(const PhiChart& chart, Complex alpha, const TestFunction& u) {
    require(alpha.real() > 0.0, ErrorKind::order_not_positive, "RL integral needs Re(alpha) > 0");
    if (u.is_power_sum_on(chart))
        return TestFunction::phi_power_sum(chart, detail::power_sum_differintegral(u.terms(), -alpha));
    return TestFunction::analytic([chart, alpha, u](double x) { return rl_integral_wrt(chart, alpha, u, x); });
}

/// (1/phi' d/dx)^n I^{n-alpha}_phi u, n = floor(Re alpha) + 1. Non-integer orders only.
inline Complex rl_derivative_wrt(const PhiChart& chart, Complex alpha, const TestFunction& u, double x,
                                 EvalMode mode = EvalMode::automatic) {
    require(alpha.real() >= 0.0, ErrorKind::precondition, "RL derivative needs Re(alpha) >= 0");
    require(!detail::is_nonneg_real_integer(alpha), ErrorKind::integer_order,
            "integer order: use the classical phi-derivative");
    detail::check_point(chart, x);
    const double w = chart.phi(x) - chart.phi_a();
    if (detail::use_closed_form(chart, u, mode))
        return detail::sum_power_terms(detail::power_sum_differintegral(u.terms(), alpha), w);
    require(x > chart.a, ErrorKind::domain_mismatch, "RL derivative is evaluated on (a, b]");
    // Taylor part at a is differintegrated exactly, the remainder through I^{n-alpha} u_phi^{(n)}.
    const int n = static_cast<int>(std::floor(alpha.real())) + 1;
    Complex acc{};
    for (int k = 0; k < n; ++k)
        acc += u.phi_derivative(chart, k, chart.a) * offset_power(w, static_cast<double>(k) - alpha) *
               rgamma(static_cast<double>(k) + 1.0 - alpha);
    const Complex order = static_cast<double>(n) - alpha;
    acc += integrate_offset([&](double, double v) { return u.phi_derivative(chart, n, chart.at_offset(v)); }, order,
                            w, detail::derivative_quadrature(chart, u, n)) *
           rgamma(order);
    return acc;
}

/// I^{n-alpha}_phi applied to the n-th phi-derivative of u.
inline Complex caputo_derivative_wrt(const PhiChart& chart, Complex alpha, const TestFunction& u, double x,
                                     EvalMode mode = EvalMode::automatic) {
    require(alpha.real() >= 0.0, ErrorKind::precondition, "Caputo derivative needs Re(alpha) >= 0");
    require(!detail::is_nonneg_real_integer(alpha), ErrorKind::integer_order,
            "integer order: use the classical phi-derivative");
    detail::check_point(chart, x);
    const int n = static_cast<int>(std::floor(alpha.real())) + 1;
    const Complex order = static_cast<double>(n) - alpha;
    const double w = chart.phi(x) - chart.phi_a();
    if (detail::use_closed_form(chart, u, mode)) {
        Complex acc{};
        for (const PowerTerm& t : u.terms()) {
            Complex falling = 1.0;
            for (int j = 0; j < n; ++j)
                falling *= t.exponent - static_cast<double>(j);
            if (falling == 0.0)
                continue;
            require(t.exponent.real() > n - 1, ErrorKind::precondition,
                    "Caputo derivative of w^p needs Re(p) > n - 1 or integer p < n");
            acc += t.coeff * gamma(t.exponent + 1.0) * rgamma(t.exponent + 1.0 - alpha) *
                   offset_power(w, t.exponent - alpha);
        }
        return acc;
    }
    if (x == chart.a)
        return 0.0;
    return integrate_offset([&](double, double v) { return u.phi_derivative(chart, n, chart.at_offset(v)); }, order,
                            w, detail::derivative_quadrature(chart, u, n)) *
           rgamma(order);
}

/// Order-nu RL differintegral: integral for Re nu < 0, identity at 0, derivative
/// otherwise (classical phi-derivative at positive integers).
inline Complex rl_differintegral(const PhiChart& chart, Complex nu, const TestFunction& u, double x,
                                 EvalMode mode = EvalMode::automatic) {
    detail::check_point(chart, x);
    if (detail::use_closed_form(chart, u, mode))
        return detail::sum_power_terms(detail::power_sum_differintegral(u.terms(), nu), chart.phi(x) - chart.phi_a());
    if (nu == 0.0)
        return u(x);
    if (nu.real() < 0.0)
        return rl_integral_wrt(chart, -nu, u, x, mode);
    if (detail::is_nonneg_real_integer(nu))
        return u.phi_derivative(chart, static_cast<int>(nu.real()), x);
    return rl_derivative_wrt(chart, nu, u, x, mode);
}

/// max over grid of |I^alpha I^beta u - I^{alpha+beta} u|.
inline double rl_semigroup_check(const PhiChart& chart, Complex alpha, Complex beta, const TestFunction& u,
                                 std::span<const double> grid) {
    require(alpha.real() > 0.0 && beta.real() > 0.0, ErrorKind::order_not_positive,
            "semigroup check needs positive orders");
    const TestFunction inner = rl_integral_function(chart, beta, u);
    double worst = 0.0;
    for (double x : grid) {
        const Complex lhs = rl_integral_wrt(chart, alpha, inner, x);
        const Complex rhs = rl_integral_wrt(chart, alpha + beta, u, x);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

} // namespace genfrac
