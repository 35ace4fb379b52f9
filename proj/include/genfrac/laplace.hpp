#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "genfrac/chart.hpp"
#include "genfrac/errors.hpp"
#include "genfrac/kernel.hpp"
#include "genfrac/kernel_algebra.hpp"
#include "genfrac/operators.hpp"
#include "genfrac/parallel.hpp"
#include "genfrac/quadrature.hpp"
#include "genfrac/test_function.hpp"

namespace genfrac {

/// u-hat(s) together with the abscissa c it is valid beyond (Re s > c).
struct TransformValue {
    Complex s;
    Complex value;
    double abscissa = -std::numeric_limits<double>::infinity();
};

namespace detail {

inline void require_laplace_chart(const PhiChart& chart) {
    require(std::abs(chart.phi_a()) <= 1e-14, ErrorKind::domain_mismatch, "transform needs phi(a) = 0");
    require(chart.unbounded(), ErrorKind::domain_mismatch, "transform needs a chart on [a, infinity)");
}

inline Complex principal_pow(Complex s, Complex p) {
    if (p == 0.0)
        return 1.0;
    return std::exp(p * std::log(s));
}

// |u| e^{-c y} must not run away at large y when the order c is declared.
inline void verify_growth_order(const TestFunction& u, const PhiChart& chart, double c) {
    double early = 0.0;
    for (double y : {1.0, 2.0, 4.0})
        early = std::max(early, std::abs(u.at_offset(chart, y)) * std::exp(-c * y));
    const double late = std::abs(u.at_offset(chart, 64.0)) * std::exp(-c * 64.0);
    if (!std::isfinite(late) || late > 1e8 * std::max(early, 1e-300))
        fail(ErrorKind::abscissa_violation,
             "u grows faster than the declared phi-exponential order " + std::to_string(c));
}

// Sum of panels [k h, (k+1) h] of g over [0, infinity) until the tail is below tail_tol.
template <class G>
Complex sum_panels(const G& g, double h, double tail_tol, int max_panels, double* last_ratio) {
    std::vector<double> mags;
    Complex total{};
    int quiet = 0;
    for (int k = 0; k < max_panels; ++k) {
        const Complex p = adaptive_integrate(g, k * h, (k + 1) * h, 1e-13);
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            fail(ErrorKind::abscissa_violation, "transform integrand overflows: s is left of the abscissa");
        total += p;
        mags.push_back(std::abs(p));
        if (k >= 16 && mags[k] > 0.0 && mags[k] >= mags[k - 8])
            fail(ErrorKind::abscissa_violation, "tail panels fail to decay: s is left of the abscissa");
        quiet = mags[k] <= tail_tol * std::abs(total) ? quiet + 1 : 0;
        if (k >= 3 && total == 0.0 && mags[k] == 0.0 && mags[k - 1] == 0.0)
            quiet = 2;
        if (quiet >= 2) {
            if (last_ratio)
                *last_ratio = mags[k - 1] > 0.0 ? mags[k] / mags[k - 1] : 0.0;
            return total;
        }
    }
    fail(ErrorKind::no_convergence, "transform tail did not fall below " + detail::sci(tail_tol) + " within " +
                                        std::to_string(max_panels) + " panels");
}

// Analytic extension of y -> u(phi^{-1}(y)) and its sector half-angle, if known.
inline std::pair<std::function<Complex(Complex)>, double> phi_time_extension(const TestFunction& u,
                                                                             const PhiChart& chart) {
    if (u.phi_time_extension())
        return {u.phi_time_extension(), u.sector()};
    if (u.is_power_sum_on(chart)) {
        std::vector<PowerTerm> terms = u.terms();
        auto U = [terms](Complex z) {
            Complex acc{};
            for (const PowerTerm& t : terms)
                acc += t.coeff * (z == 0.0 ? offset_power(0.0, t.exponent) : principal_pow(z, t.exponent));
            return acc;
        };
        return {U, std::numbers::pi};
    }
    return {{}, 0.0};
}

} // namespace detail

/// integral_0^inf e^{-s phi(x)} phi'(x) u(x) dx, computed as the classical
/// transform of u o phi^{-1} over panels of width ln(10)/Re(s).
///
/// A declared growth order on u is checked and reported as the abscissa;
/// otherwise the abscissa is estimated from the decay of the last panels.
inline TransformValue glt_forward(const TestFunction& u, const PhiChart& chart, Complex s, double tail_tol = 1e-12,
                                  int max_panels = 2000) {
    detail::require_laplace_chart(chart);
    require(tail_tol > 0.0, ErrorKind::precondition, "tail tolerance must be positive");
    const std::optional<double> declared = u.growth_order();
    if (declared) {
        if (!(s.real() > *declared))
            fail(ErrorKind::abscissa_violation, "Re(s) = " + std::to_string(s.real()) +
                                                    " is not beyond the declared order " + std::to_string(*declared));
        detail::verify_growth_order(u, chart, *declared);
    }
    require(s.real() > 0.0 || declared, ErrorKind::abscissa_violation,
            "Re(s) <= 0 needs a declared phi-exponential order");
    const double h = std::numbers::ln10 / (declared ? std::max(s.real(), s.real() - *declared) : s.real());
    double ratio = 0.0;
    const Complex value = detail::sum_panels(
        [&](double y) { return std::exp(-s * y) * u.at_offset(chart, y); }, h, tail_tol, max_panels, &ratio);
    TransformValue out{s, value};
    if (declared) {
        out.abscissa = *declared;
    } else if (ratio > 0.0) {
        // A panel ratio of 10^{-(1 - c/Re s)} corresponds to order c.
        out.abscissa = std::min(s.real() * (1.0 + std::log10(ratio)), std::nextafter(s.real(), -INFINITY));
    }
    return out;
}

/// Analytic continuation of the transform: the integration ray is rotated to
/// arg y = -arg s (clipped to u's sector), which reaches Re(s) <= 0 for
/// functions with a known extension. Falls back to glt_forward otherwise.
inline Complex glt_continue(const TestFunction& u, const PhiChart& chart, Complex s, double tail_tol = 1e-12) {
    detail::require_laplace_chart(chart);
    const auto [U, sector] = detail::phi_time_extension(u, chart);
    if (!U || sector <= 0.0)
        return glt_forward(u, chart, s, tail_tol).value;
    const double omega = std::clamp(-std::arg(s), -sector, sector);
    const Complex dir = std::polar(1.0, omega);
    const double rate = (s * dir).real();
    if (!(rate > 0.0))
        fail(ErrorKind::abscissa_violation, "no ray inside the extension sector gives decay at s = (" +
                                                std::to_string(s.real()) + ", " + std::to_string(s.imag()) + ")");
    return detail::sum_panels([&](double rho) { return std::exp(-s * dir * rho) * U(dir * rho) * dir; },
                              std::numbers::ln10 / rate, tail_tol, 2000, nullptr);
}

/// Transform of the generalized integral: s^{-alpha} A_Gamma(s^{-beta}) u-hat(s).
inline TransformValue glt_of_integral(const AnalyticKernel& kernel, Complex alpha, Complex beta,
                                      const TransformValue& u_hat, const TruncationPolicy& trunc = {}) {
    const Complex s = u_hat.s;
    require(s.real() > u_hat.abscissa, ErrorKind::abscissa_violation, "Re(s) is not beyond the abscissa of u-hat");
    const GammaSeries series = gamma_series(kernel, alpha, beta, trunc.max_terms);
    const Complex z = detail::principal_pow(s, -beta);
    TransformValue out{s, detail::principal_pow(s, -alpha) * series(z, trunc) * u_hat.value, u_hat.abscissa};
    const double R = series.radius();
    if (std::isfinite(R) && beta.imag() == 0.0 && beta.real() > 0.0)
        out.abscissa = std::max(out.abscissa,
                                std::min(std::pow(R, -1.0 / beta.real()), std::nextafter(s.real(), -INFINITY)));
    return out;
}

/// Number of initial values needed for term n of the derivative transform:
/// N_n + 1 with N_n = floor(Re(alpha - beta n)), for the n with Re(alpha - beta n) >= 0.
inline std::vector<int> derivative_initial_value_counts(Complex alpha, Complex beta) {
    std::vector<int> counts;
    for (std::size_t n = 0;; ++n) {
        const double order = (alpha - beta * static_cast<double>(n)).real();
        if (order < 0.0 || (n > 0 && beta.real() <= 0.0))
            break;
        counts.push_back(static_cast<int>(std::floor(order)) + 1);
    }
    return counts;
}

/// Transform of the generalized RL derivative:
/// sum_n w_n s^{alpha - beta n} u-hat(s) - sum_{n,i} w_n s^{N_n - i} init[n][i],
/// with w_n = abar_n Gamma(beta n - alpha + m) and init[n][i] = (I^{N_n - i + beta n - alpha + 1} u)(0).
inline TransformValue glt_of_derivative(const AnalyticKernel& kernel, Complex alpha, Complex beta,
                                        const TransformValue& u_hat, const std::vector<std::vector<Complex>>& init,
                                        const TruncationPolicy& trunc = {}) {
    const Complex s = u_hat.s;
    require(s.real() > u_hat.abscissa, ErrorKind::abscissa_violation, "Re(s) is not beyond the abscissa of u-hat");
    const int m = derivative_order(alpha);
    const AnalyticKernel bar = reciprocal_kernel(kernel, alpha, beta, m);
    const Complex order = static_cast<double>(m) - alpha;
    const std::vector<int> counts = derivative_initial_value_counts(alpha, beta);
    require(init.size() >= counts.size(), ErrorKind::missing_initial_values,
            "derivative transform needs initial values for " + std::to_string(counts.size()) + " kernel terms");
    for (std::size_t n = 0; n < counts.size(); ++n)
        require(init[n].size() >= static_cast<std::size_t>(counts[n]), ErrorKind::missing_initial_values,
                "term " + std::to_string(n) + " needs " + std::to_string(counts[n]) + " initial values");

    const Complex z = detail::principal_pow(s, -beta);
    if (!(std::abs(z) < bar.gamma_radius(order, beta)))
        fail(ErrorKind::out_of_disc, "|s^-beta| lies outside the disc of the reciprocal Gamma-weighted series");
    const Complex log_s = std::log(s);
    SeriesAccumulator acc(trunc, bar.max_index_hint());
    for (std::size_t n = 0;; ++n) {
        const Complex w = bar.gamma_weighted(n, order, beta);
        const Complex term = w == 0.0 ? Complex{} : w * std::exp((alpha - beta * static_cast<double>(n)) * log_s);
        if (acc.add(term))
            break;
    }
    Complex value = acc.result("derivative transform series").value * u_hat.value;
    for (std::size_t n = 0; n < counts.size(); ++n) {
        const Complex w = bar.gamma_weighted(n, order, beta);
        const int N = counts[n] - 1;
        for (int i = 0; i <= N; ++i)
            value -= w * std::pow(s, N - i) * init[n][static_cast<std::size_t>(i)];
    }
    return {s, value, u_hat.abscissa};
}

enum class InversionMethod { gaver_stehfest, talbot, cross_check };

struct InversionParams {
    int stehfest_terms = 16;
    int talbot_nodes = 32;
    /// Relative agreement required in cross_check mode.
    double cross_tol = 1e-4;
};

namespace detail {

inline std::vector<double> stehfest_weights(int N) {
    require(N >= 2 && N % 2 == 0 && N <= 30, ErrorKind::invalid_params, "Gaver-Stehfest needs an even N in [2, 30]");
    auto fact = [](int k) { return std::tgamma(static_cast<long double>(k) + 1.0L); };
    const int half = N / 2;
    std::vector<double> V(static_cast<std::size_t>(N) + 1);
    for (int k = 1; k <= N; ++k) {
        long double acc = 0.0L;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j)
            acc += std::pow(static_cast<long double>(j), half) * fact(2 * j) /
                   (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
        V[static_cast<std::size_t>(k)] = static_cast<double>(((k + half) % 2 == 0 ? 1.0L : -1.0L) * acc);
    }
    return V;
}

struct TalbotNode {
    Complex s;
    Complex weight;
};

// Fixed-Talbot contour s = r theta (cot theta + i), r = 2M/(5t), trapezoid in theta on (-pi, pi).
inline std::vector<TalbotNode> talbot_nodes(double t, int M) {
    require(M >= 4, ErrorKind::invalid_params, "Talbot needs at least 4 nodes");
    const double r = 2.0 * M / (5.0 * t);
    std::vector<TalbotNode> nodes{{r, 0.5 * r / M}};
    for (int k = 1; k < M; ++k) {
        const double theta = std::numbers::pi * k / M;
        const double cot = 1.0 / std::tan(theta);
        const double sigma = theta + (theta * cot - 1.0) * cot;
        const Complex s = r * theta * Complex(cot, 1.0);
        nodes.push_back({s, 0.5 * r / M * Complex(1.0, sigma)});
        nodes.push_back({std::conj(s), 0.5 * r / M * Complex(1.0, -sigma)});
    }
    return nodes;
}

} // namespace detail

/// Frequencies at which invert_laplace samples F for time t.
inline std::vector<Complex> inversion_nodes(double t, InversionMethod method, const InversionParams& params = {}) {
    std::vector<Complex> out;
    if (method != InversionMethod::talbot)
        for (int k = 1; k <= params.stehfest_terms; ++k)
            out.emplace_back(k * std::numbers::ln2 / t, 0.0);
    if (method != InversionMethod::gaver_stehfest)
        for (const auto& node : detail::talbot_nodes(t, params.talbot_nodes))
            out.push_back(node.s);
    return out;
}

/// Numerical inverse Laplace transform at t > 0. cross_check evaluates both
/// methods, fails with MethodFailure beyond params.cross_tol, and returns the Talbot value.
template <class F>
Complex invert_laplace(const F& transform, double t, InversionMethod method = InversionMethod::talbot,
                       const InversionParams& params = {}) {
    require(t > 0.0 && std::isfinite(t), ErrorKind::precondition, "inversion needs t > 0");
    auto stehfest = [&] {
        const std::vector<double> V = detail::stehfest_weights(params.stehfest_terms);
        const double h = std::numbers::ln2 / t;
        double acc = 0.0;
        for (int k = 1; k <= params.stehfest_terms; ++k) {
            const Complex Fk = transform(Complex(k * h, 0.0));
            require(std::abs(Fk.imag()) <= 1e-10 * std::max(std::abs(Fk), 1e-300), ErrorKind::precondition,
                    "Gaver-Stehfest needs F real on the real axis");
            acc += V[static_cast<std::size_t>(k)] * Fk.real();
        }
        return Complex(h * acc, 0.0);
    };
    auto talbot = [&] {
        Complex acc{};
        for (const auto& node : detail::talbot_nodes(t, params.talbot_nodes)) {
            const Complex e = std::exp(t * node.s);
            if (e != 0.0)
                acc += node.weight * e * transform(node.s);
        }
        return acc;
    };
    switch (method) {
    case InversionMethod::gaver_stehfest:
        return stehfest();
    case InversionMethod::talbot:
        return talbot();
    case InversionMethod::cross_check: {
        const Complex gs = stehfest();
        const Complex ft = talbot();
        const double scale = std::max({std::abs(ft), std::abs(gs), 1e-300});
        if (std::abs(gs - ft) > params.cross_tol * scale)
            fail(ErrorKind::method_failure, "Gaver-Stehfest and Talbot disagree at t = " + std::to_string(t) + ": " +
                                                detail::sci(std::abs(gs - ft) / scale) + " relative");
        return ft;
    }
    }
    fail(ErrorKind::precondition, "unknown inversion method");
}

/// Model equation  A-I^{alpha,beta}_phi u + c u = v  on [0, infinity), phi(0) = 0.
struct IntegralEquation {
    AnalyticKernel kernel;
    Complex alpha;
    Complex beta = 1.0;
    PhiChart chart;
    double c = 1.0;
    TestFunction v;
    /// Transform of v in phi-time; computed from v when empty.
    std::function<Complex(Complex)> v_hat = {};

    void validate() const {
        require(kernel.valid(), ErrorKind::precondition, "equation has no kernel");
        require(alpha.real() > 0.0, ErrorKind::order_not_positive, "equation needs Re(alpha) > 0");
        require(c != 0.0 && std::isfinite(c), ErrorKind::invalid_params, "equation needs a finite c != 0");
        detail::require_laplace_chart(chart);
    }

    /// Consistency value u(0) = v(0)/c.
    Complex initial_value() const { return v(chart.a) / c; }
};

struct IntegralSolution {
    std::vector<double> x;
    std::vector<Complex> u;
    /// |A-I u + c u - v| at each grid point.
    std::vector<double> residual;
    double max_residual = 0.0;
    Complex initial_value;
};

struct SolveOptions {
    InversionMethod method = InversionMethod::talbot;
    InversionParams params;
    TruncationPolicy trunc;
    unsigned threads = 1;
    /// Chebyshev degree of the phi-time interpolant behind the residual.
    int residual_degree = 32;
};

/// u(x) = L^{-1}[v-hat / (s^{-alpha} A_Gamma(s^{-beta}) + c)](phi(x)), with a residual report.
inline IntegralSolution solve_integral_equation(const IntegralEquation& eq, const std::vector<double>& grid,
                                                const SolveOptions& opt = {}) {
    eq.validate();
    require(!grid.empty(), ErrorKind::precondition, "solver grid is empty");
    for (double x : grid)
        require(x >= eq.chart.a && std::isfinite(x), ErrorKind::domain_mismatch, "grid point outside [a, infinity)");

    const GammaSeries series = gamma_series(eq.kernel, eq.alpha, eq.beta, opt.trunc.max_terms);
    auto symbol = [&](Complex s) {
        return detail::principal_pow(s, -eq.alpha) * series(detail::principal_pow(s, -eq.beta), opt.trunc);
    };
    auto denominator = [&](Complex s) { return symbol(s) + eq.c; };
    auto v_hat = [&](Complex s) { return eq.v_hat ? eq.v_hat(s) : glt_continue(eq.v, eq.chart, s); };
    auto F = [&](Complex s) { return v_hat(s) / denominator(s); };

    IntegralSolution out;
    out.initial_value = eq.initial_value();
    const double y_max = eq.chart.phi(*std::max_element(grid.begin(), grid.end()));

    // phi-times needed: grid points and the Chebyshev nodes of the residual interpolant.
    std::vector<double> times;
    for (double x : grid)
        times.push_back(eq.chart.phi(x));
    const int deg = opt.residual_degree;
    if (y_max > 0.0)
        for (int j = 0; j <= deg; ++j)
            times.push_back(0.5 * y_max * (1.0 + std::cos(std::numbers::pi * j / deg)));

    for (double t : times) {
        if (t <= 0.0)
            continue;
        for (Complex s : inversion_nodes(t, opt.method, opt.params)) {
            const Complex d = denominator(s);
            if (!(std::abs(d) > 1e-12 * (std::abs(symbol(s)) + std::abs(eq.c))))
                fail(ErrorKind::denominator_zero, "s^-alpha A_Gamma(s^-beta) + c vanishes at an inversion node (t = " +
                                                      std::to_string(t) + ")");
        }
    }

    std::vector<Complex> values(times.size());
    parallel_for(times.size(), opt.threads, [&](std::size_t i) {
        values[i] = times[i] <= 0.0 ? out.initial_value : invert_laplace(F, times[i], opt.method, opt.params);
    });

    out.x = grid;
    out.u.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(grid.size()));
    if (y_max <= 0.0) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            out.residual.push_back(std::abs(eq.c * out.u[i] - eq.v(grid[i])));
    } else {
        // Interpolant through the Chebyshev samples, in phi-time.
        std::vector<Complex> cheb(values.begin() + static_cast<std::ptrdiff_t>(grid.size()), values.end());
        std::size_t next = 0;
        const detail::ChebyshevInterpolant interp([&](double) { return cheb[next++]; }, 0.0, y_max, deg);
        const PhiChart chart = eq.chart;
        const TestFunction u_fn = TestFunction::analytic([interp, chart](double x) { return interp(chart.phi(x)); });
        PhiChart bounded = eq.chart;
        bounded.b = *std::max_element(grid.begin(), grid.end());
        OperatorSpec spec{eq.kernel, eq.alpha, eq.beta, bounded};
        out.residual.resize(grid.size());
        parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
            const Complex iu = gfi_quadrature(spec, u_fn, grid[i], opt.trunc);
            out.residual[i] = std::abs(iu + eq.c * out.u[i] - eq.v(grid[i]));
        });
    }
    for (double r : out.residual)
        out.max_residual = std::max(out.max_residual, r);
    return out;
}

} // namespace genfrac
