#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
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

struct NormSpec {
    double p = 1.0;
    PhiChart chart;
    Complex alpha_weight = 0.0;
    int m = 0;
    int grid_size = 256;

    void validate() const {
        require(std::isfinite(p) && p >= 1.0, ErrorKind::invalid_params, "norm exponent needs 1 <= p < infinity");
        require(grid_size >= 16, ErrorKind::invalid_params, "norm grid needs at least 16 points");
        require(m >= 0, ErrorKind::invalid_params, "derivative count must be non-negative");
        require(!chart.unbounded(), ErrorKind::domain_mismatch, "norms are defined on bounded charts");
    }
};

/// (integral_a^b |u|^p phi' dx)^{1/p}, integrated in w = phi(x) - phi(a).
inline double lp_phi_norm(const TestFunction& u, const NormSpec& spec) {
    spec.validate();
    const PhiChart& c = spec.chart;
    try {
        const Complex total = adaptive_integrate(
            [&](double w) { return std::pow(std::abs(u.at_offset(c, w)), spec.p); }, 0.0, c.length(), 1e-12);
        return std::pow(total.real(), 1.0 / spec.p);
    } catch (const Error& err) {
        if (err.kind() == ErrorKind::no_convergence)
            fail(ErrorKind::divergent_norm, "L^p norm integral does not converge: " + std::string(err.what()));
        throw;
    }
}

namespace detail {

// Golden-section maximization of f on [lo, hi].
template <class F>
double refine_max(const F& f, double lo, double hi, double best) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        if (f1 > f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    return std::max({best, f1, f2});
}

// sup over w in (0, L] of |w^alpha g(w)|, with a decade sweep toward w = 0.
template <class G>
double weighted_sup(const G& g, double L, Complex alpha, int grid_size, bool include_origin) {
    auto f = [&](double w) {
        const double weight = alpha == 0.0 ? 1.0 : std::pow(w, alpha.real());
        const double v = std::abs(g(w)) * weight;
        require(std::isfinite(v), ErrorKind::unbounded, "weighted function is not finite at w = " + std::to_string(w));
        return v;
    };
    std::vector<double> ws;
    for (int j = 1; j <= grid_size; ++j)
        ws.push_back(0.5 * L * (1.0 - std::cos(std::numbers::pi * j / grid_size)));
    std::vector<double> vals;
    double best = 0.0;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < ws.size(); ++j) {
        vals.push_back(f(ws[j]));
        if (vals.back() > best) {
            best = vals.back();
            arg = j;
        }
    }
    // Toward the left endpoint: a persistent rise by decades means no finite sup.
    std::vector<double> decades;
    for (int k = 1; k <= 12; ++k)
        decades.push_back(f(L * std::pow(10.0, -k)));
    const double smallest = decades.back();
    const bool rising = decades[11] > decades[10] * 1.5 && decades[10] > decades[9] * 1.5 && decades[9] > decades[8] * 1.5;
    if (rising && smallest > 1e3 * std::max(best, 1e-300))
        fail(ErrorKind::unbounded, "weighted function grows without bound toward the left endpoint");
    for (double v : decades)
        best = std::max(best, v);
    if (include_origin && alpha == 0.0) {
        const double at0 = std::abs(g(0.0));
        if (std::isfinite(at0))
            best = std::max(best, at0);
    }
    const double lo = arg == 0 ? ws[0] * 0.5 : ws[arg - 1];
    const double hi = arg + 1 < ws.size() ? ws[arg + 1] : ws[arg];
    if (hi > lo)
        best = refine_max(f, lo, hi, best);
    return best;
}

} // namespace detail

/// sup over (a, b] of |(phi(x) - phi(a))^alpha u(x)|.
inline double c_alpha_phi_norm(const TestFunction& u, const NormSpec& spec) {
    spec.validate();
    const PhiChart& c = spec.chart;
    return detail::weighted_sup([&](double w) { return u.at_offset(c, w); }, c.length(), spec.alpha_weight,
                                spec.grid_size, true);
}

/// sum_{k<m} sup |u^{(k)}| + c_alpha_phi_norm(u^{(m)}), ordinary derivatives.
inline double c_m_alpha_phi_norm(const TestFunction& u, const NormSpec& spec) {
    spec.validate();
    const PhiChart& c = spec.chart;
    double total = 0.0;
    for (int k = 0; k < spec.m; ++k)
        total += detail::weighted_sup([&](double w) { return u.derivative(c, k, c.at_offset(w)); }, c.length(), 0.0,
                                      spec.grid_size, true);
    total += detail::weighted_sup([&](double w) { return u.derivative(c, spec.m, c.at_offset(w)); }, c.length(),
                                  spec.alpha_weight, spec.grid_size, true);
    return total;
}

/// Estimate of sup |f(tau)| over |tau| = radius.
struct CircleSup {
    double value = 0.0;
    int samples = 0;
    /// Angular spacing of the base sampling, refined locally after.
    double resolution = 0.0;
};

template <class F>
CircleSup sup_on_circle(const F& f, double radius, int samples = 4096) {
    CircleSup out;
    out.samples = samples;
    out.resolution = 2.0 * std::numbers::pi / samples;
    if (radius == 0.0) {
        out.value = std::abs(f(Complex{}));
        return out;
    }
    auto mag = [&](double theta) { return std::abs(f(std::polar(radius, theta))); };
    double best = -1.0, arg = 0.0;
    for (int j = 0; j < samples; ++j) {
        const double theta = out.resolution * j;
        const double v = mag(theta);
        if (v > best) {
            best = v;
            arg = theta;
        }
    }
    out.value = detail::refine_max(mag, arg - out.resolution, arg + out.resolution, best);
    return out;
}

/// sup |A(tau)| over |tau| < radius, from the boundary circle.
inline CircleSup kernel_sup_on_circle(const AnalyticKernel& kernel, Complex alpha, Complex beta, double radius,
                                      const TruncationPolicy& trunc = {}) {
    if (!(radius < kernel.radius()))
        fail(ErrorKind::out_of_disc, "sup radius " + std::to_string(radius) + " is not inside the kernel disc");
    const detail::KernelEvaluator A(kernel, alpha, beta, trunc);
    return sup_on_circle(A, radius);
}

/// K = L^{Re alpha} / Re alpha * sup_{|tau| < L^{Re beta}} |A(tau)|.
inline double bound_K(const AnalyticKernel& kernel, Complex alpha, Complex beta, const PhiChart& chart) {
    require(alpha.real() > 0.0, ErrorKind::order_not_positive, "bound K needs Re(alpha) > 0");
    const double L = chart.length();
    const double r = kernel.max_index_hint() == std::size_t{0} ? 0.0 : std::pow(L, beta.real());
    return std::pow(L, alpha.real()) / alpha.real() * kernel_sup_on_circle(kernel, alpha, beta, r).value;
}

/// M = L^{Re(m-alpha)} / Re(m-alpha) * sup_{|tau| < L^{Re beta}} |Abar(tau)|,
/// with Abar summed to `terms` coefficients.
inline double bound_M(const AnalyticKernel& kernel, Complex alpha, Complex beta, int m, const PhiChart& chart,
                      std::size_t terms = 60) {
    const AnalyticKernel bar = reciprocal_kernel(kernel, alpha, beta, m, terms);
    const Complex order = static_cast<double>(m) - alpha;
    const double L = chart.length();
    const double r = bar.max_index_hint() == std::size_t{0} ? 0.0 : std::pow(L, beta.real());
    return std::pow(L, order.real()) / order.real() *
           kernel_sup_on_circle(bar, order, beta, r, TruncationPolicy::fixed(terms)).value;
}

/// ||A-integral of u||_{L^p_phi} / ||u||_{L^p_phi}.
inline double boundedness_ratio(const OperatorSpec& spec, const TestFunction& u, double p) {
    const NormSpec norm{p, spec.chart};
    const double base = lp_phi_norm(u, norm);
    require(base > 0.0, ErrorKind::precondition, "boundedness ratio is undefined for the zero function");
    const TestFunction image = u.is_power_sum_on(spec.chart)
                                   ? gfi_series_expansion(spec, u)
                                   : TestFunction::analytic([&spec, u](double x) { return gfi_series(spec, u, x); });
    return lp_phi_norm(image, norm) / base;
}

struct AuditReport {
    double max_ratio = 0.0;
    double bound = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
    bool pass = false;
    std::vector<double> ratios;
};

/// Degree <= 5 polynomial in w = phi(x) - phi(a) with coefficients uniform in [-1, 1].
inline TestFunction random_phi_polynomial(const PhiChart& chart, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> degree(0, 5);
    const int d = degree(rng);
    std::vector<PowerTerm> terms;
    for (int k = 0; k <= d; ++k)
        terms.push_back({coeff(rng), static_cast<double>(k)});
    return TestFunction::phi_power_sum(chart, std::move(terms));
}

namespace detail {

inline AuditReport run_audit(double bound, int trials, std::uint64_t seed, unsigned threads,
                             const std::function<double(std::uint64_t)>& ratio_for) {
    require(trials > 0, ErrorKind::invalid_params, "audit needs at least one trial");
    AuditReport report;
    report.bound = bound;
    report.trials = trials;
    report.seed = seed;
    report.ratios.assign(static_cast<std::size_t>(trials), 0.0);
    parallel_for(static_cast<std::size_t>(trials), threads,
                 [&](std::size_t i) { report.ratios[i] = ratio_for(splitmix64(seed + i)); });
    for (double r : report.ratios)
        report.max_ratio = std::max(report.max_ratio, r);
    report.pass = report.max_ratio <= bound * (1.0 + 1e-9) + 1e-9;
    return report;
}

} // namespace detail

/// Empirical check of ||A-integral u||_{L^p} <= K ||u||_{L^p} on random polynomials.
inline AuditReport boundedness_audit(const AnalyticKernel& kernel, Complex alpha, Complex beta, const PhiChart& chart,
                                     double p, int trials, std::uint64_t seed = 20240601, unsigned threads = 1) {
    const OperatorSpec spec{kernel, alpha, beta, chart};
    spec.validate();
    const double K = bound_K(kernel, alpha, beta, chart);
    return detail::run_audit(K, trials, seed, threads, [&](std::uint64_t s) {
        TestFunction u = random_phi_polynomial(chart, s);
        return boundedness_ratio(spec, u, p);
    });
}

/// Empirical check of ||D u||_{C_{alpha,phi}} <= M ||u||_{C^m_{alpha,phi}} for the
/// RL-type generalized derivative on random polynomials.
inline AuditReport derivative_audit(const AnalyticKernel& kernel, Complex alpha, Complex beta, const PhiChart& chart,
                                    int trials, std::uint64_t seed = 20240601, unsigned threads = 1) {
    const OperatorSpec spec{kernel, alpha, beta, chart, OperatorVariant::rl_derivative};
    spec.validate();
    const int m = spec.m();
    const double M = bound_M(kernel, alpha, beta, m, chart);
    const NormSpec image_norm{1.0, chart, alpha, 0};
    const NormSpec source_norm{1.0, chart, alpha, m};
    return detail::run_audit(M, trials, seed, threads, [&](std::uint64_t s) {
        const TestFunction u = random_phi_polynomial(chart, s);
        const TestFunction du = TestFunction::analytic([&spec, u](double x) { return gfd_rl(spec, u, x); });
        const double base = c_m_alpha_phi_norm(u, source_norm);
        require(base > 0.0, ErrorKind::precondition, "derivative audit drew a zero function");
        return c_alpha_phi_norm(du, image_norm) / base;
    });
}

} // namespace genfrac
