#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "genfrac/chart.hpp"
#include "genfrac/complex_gamma.hpp"
#include "genfrac/errors.hpp"
#include "genfrac/kernel.hpp"
#include "genfrac/kernel_algebra.hpp"
#include "genfrac/phi_calculus.hpp"
#include "genfrac/quadrature.hpp"
#include "genfrac/test_function.hpp"

namespace genfrac {

enum class OperatorVariant { integral, rl_derivative, caputo_derivative };

/// Kernel, orders and chart of a generalized operator.
struct OperatorSpec {
    AnalyticKernel kernel;
    Complex alpha;
    Complex beta = 1.0;
    PhiChart chart;
    OperatorVariant variant = OperatorVariant::integral;

    /// floor(Re alpha) + 1 for derivative variants.
    int m() const { return derivative_order(alpha); }

    void validate() const {
        require(kernel.valid(), ErrorKind::precondition, "operator has no kernel");
        if (variant == OperatorVariant::integral) {
            require(alpha.real() > 0.0, ErrorKind::order_not_positive, "integral needs Re(alpha) > 0");
        } else {
            require(alpha.real() >= 0.0, ErrorKind::order_not_positive, "derivative needs Re(alpha) >= 0");
            require(alpha.real() != std::floor(alpha.real()), ErrorKind::integer_order,
                    "derivative order needs non-integer Re(alpha)");
        }
        require(beta.real() > 0.0 || (beta == 0.0 && kernel.max_index_hint() == std::size_t{0}),
                ErrorKind::invalid_params, "beta = 0 is allowed only for single-term kernels; otherwise Re(beta) > 0");
        const double L = chart.length();
        if (beta != 0.0 && kernel.max_index_hint() != std::size_t{0} && std::isfinite(kernel.radius())) {
            const double reach = std::pow(L, beta.real());
            if (!(reach < kernel.radius()))
                fail(ErrorKind::out_of_disc, "(phi(b) - phi(a))^Re(beta) = " + std::to_string(reach) +
                                                 " is not inside the kernel disc of radius " +
                                                 std::to_string(kernel.radius()));
        }
    }
};

namespace detail {

inline void require_variant(const OperatorSpec& spec, OperatorVariant want, const char* op) {
    require(spec.variant == want, ErrorKind::precondition, std::string(op) + " received a spec of the wrong variant");
    spec.validate();
}

// A(z) from a cached coefficient block.
class KernelEvaluator {
public:
    KernelEvaluator(const AnalyticKernel& kernel, Complex alpha, Complex beta, TruncationPolicy trunc)
        : coeffs_(kernel.coefficients(alpha, beta, trunc.max_terms)), hint_(kernel.max_index_hint()), trunc_(trunc),
          name_(kernel.name()) {}

    Complex operator()(Complex z) const {
        if (z == 0.0 || hint_ == std::size_t{0})
            return coeffs_[0];
        return sum_power_series([&](std::size_t n) { return n < coeffs_.size() ? coeffs_[n] : Complex{}; }, z, trunc_,
                                hint_, "kernel " + name_)
            .value;
    }

private:
    std::vector<Complex> coeffs_;
    std::optional<std::size_t> hint_;
    TruncationPolicy trunc_;
    std::string name_;
};

inline Complex offset_pow(double s, Complex beta) {
    if (s == 0.0)
        return beta == 0.0 ? Complex(1.0) : Complex{};
    if (beta.imag() == 0.0)
        return std::pow(s, beta.real());
    return std::exp(beta * std::log(s));
}

// Terms of the order-nu RL integral of a power sum.
inline void append_integrated(std::vector<PowerTerm>& out, std::span<const PowerTerm> terms, Complex weight,
                              Complex nu) {
    for (const PowerTerm& t : terms) {
        const Complex factor = gamma_ratio(t.exponent + 1.0, t.exponent + 1.0 + nu);
        if (factor != 0.0 && weight != 0.0)
            out.push_back({weight * t.coeff * factor, t.exponent + nu});
    }
}

// m-th phi-derivative of a power sum; integrability of the result is checked.
inline std::vector<PowerTerm> power_sum_phi_derivative(std::span<const PowerTerm> terms, int m) {
    std::vector<PowerTerm> out;
    for (const PowerTerm& t : terms) {
        Complex falling = 1.0;
        for (int j = 0; j < m; ++j)
            falling *= t.exponent - static_cast<double>(j);
        if (falling == 0.0)
            continue;
        require(t.exponent.real() > m - 1, ErrorKind::precondition,
                "the m-th phi-derivative of w^p is not integrable unless Re(p) > m - 1 or p is an integer below m");
        out.push_back({t.coeff * falling, t.exponent - static_cast<double>(m)});
    }
    return out;
}

// Degree-n barycentric interpolant on Chebyshev points of the second kind.
class ChebyshevInterpolant {
public:
    template <class F>
    ChebyshevInterpolant(const F& f, double lo, double hi, int degree = 32) : lo_(lo), hi_(hi) {
        for (int j = 0; j <= degree; ++j) {
            const double x = std::cos(std::numbers::pi * j / degree);
            nodes_.push_back(x);
            values_.push_back(f(0.5 * (lo + hi) + 0.5 * (hi - lo) * x));
            double w = (j % 2 == 0) ? 1.0 : -1.0;
            if (j == 0 || j == degree)
                w *= 0.5;
            weights_.push_back(w);
        }
    }

    Complex operator()(double y) const {
        const double x = (2.0 * y - lo_ - hi_) / (hi_ - lo_);
        Complex num{};
        double den = 0.0;
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            const double d = x - nodes_[j];
            if (d == 0.0)
                return values_[j];
            const double c = weights_[j] / d;
            num += c * values_[j];
            den += c;
        }
        return num / den;
    }

private:
    double lo_, hi_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<Complex> values_;
};

} // namespace detail

/// Definition route: integral_a^x phi'(t) (phi(x)-phi(t))^{alpha-1} A((phi(x)-phi(t))^beta) u(t) dt.
inline Complex gfi_quadrature(const OperatorSpec& spec, const TestFunction& u, double x,
                              const TruncationPolicy& trunc = {}, const QuadratureOptions& opt = {}) {
    detail::require_variant(spec, OperatorVariant::integral, "gfi_quadrature");
    detail::check_point(spec.chart, x);
    if (x == spec.chart.a)
        return 0.0;
    const detail::KernelEvaluator A(spec.kernel, spec.alpha, spec.beta, trunc);
    const double L = spec.chart.phi(x) - spec.chart.phi_a();
    const Complex beta = spec.beta;
    return integrate_offset(
        [&](double s, double w) { return A(detail::offset_pow(s, beta)) * u.at_offset(spec.chart, w); }, spec.alpha,
        L, opt);
}

/// Series route: sum_n a_n Gamma(beta n + alpha) I^{beta n + alpha}_phi u(x).
inline SeriesValue gfi_series_value(const OperatorSpec& spec, const TestFunction& u, double x,
                                    const TruncationPolicy& trunc = {}) {
    detail::require_variant(spec, OperatorVariant::integral, "gfi_series");
    detail::check_point(spec.chart, x);
    if (x == spec.chart.a)
        return {0.0, 0.0, 0};
    const bool closed = u.is_power_sum_on(spec.chart);
    const double w = spec.chart.phi(x) - spec.chart.phi_a();
    SeriesAccumulator acc(trunc, spec.kernel.max_index_hint());
    for (std::size_t n = 0;; ++n) {
        const Complex weight = spec.kernel.gamma_weighted(n, spec.alpha, spec.beta);
        const Complex nu = spec.beta * static_cast<double>(n) + spec.alpha;
        Complex term{};
        if (weight != 0.0) {
            if (closed) {
                for (const PowerTerm& t : u.terms())
                    term += weight * t.coeff * gamma_ratio(t.exponent + 1.0, t.exponent + 1.0 + nu) *
                            offset_power(w, t.exponent + nu);
            } else {
                term = weight * rl_integral_wrt(spec.chart, nu, u, x, EvalMode::quadrature);
            }
        }
        if (acc.add(term))
            break;
    }
    return acc.result("generalized integral series");
}

inline Complex gfi_series(const OperatorSpec& spec, const TestFunction& u, double x,
                          const TruncationPolicy& trunc = {}) {
    return gfi_series_value(spec, u, x, trunc).value;
}

/// The generalized integral of a power sum, as a power sum truncated so the
/// neglected tail is below trunc.tail_tol at x = b.
inline TestFunction gfi_series_expansion(const OperatorSpec& spec, const TestFunction& u,
                                         const TruncationPolicy& trunc = {}) {
    detail::require_variant(spec, OperatorVariant::integral, "gfi_series_expansion");
    require(u.is_power_sum_on(spec.chart), ErrorKind::precondition, "series expansion needs a phi-power-sum");
    require(!spec.chart.unbounded(), ErrorKind::domain_mismatch, "series expansion needs a bounded chart");
    const double L = spec.chart.length();
    std::vector<PowerTerm> out;
    SeriesAccumulator acc(trunc, spec.kernel.max_index_hint());
    for (std::size_t n = 0;; ++n) {
        const Complex weight = spec.kernel.gamma_weighted(n, spec.alpha, spec.beta);
        const Complex nu = spec.beta * static_cast<double>(n) + spec.alpha;
        const std::size_t before = out.size();
        detail::append_integrated(out, u.terms(), weight, nu);
        double size = 0.0;
        for (std::size_t j = before; j < out.size(); ++j)
            size += std::abs(out[j].coeff * offset_power(L, out[j].exponent));
        if (acc.add(Complex(size, 0.0)))
            break;
    }
    acc.result("generalized integral expansion");
    return TestFunction::phi_power_sum(spec.chart, std::move(out));
}

/// The kernel-bar of a derivative spec: reciprocal of A at (alpha, beta, m).
inline AnalyticKernel derivative_kernel(const OperatorSpec& spec) {
    return reciprocal_kernel(spec.kernel, spec.alpha, spec.beta, spec.m());
}

/// Riemann-Liouville-type generalized derivative via
/// sum_n abar_n Gamma(beta n - alpha + m) D^{alpha - beta n}_phi u(x).
inline SeriesValue gfd_rl_value(const OperatorSpec& spec, const TestFunction& u, double x,
                                const TruncationPolicy& trunc = {}) {
    detail::require_variant(spec, OperatorVariant::rl_derivative, "gfd_rl");
    detail::check_point(spec.chart, x);
    const AnalyticKernel bar = derivative_kernel(spec);
    const Complex order = static_cast<double>(spec.m()) - spec.alpha;
    SeriesAccumulator acc(trunc, bar.max_index_hint());
    for (std::size_t n = 0;; ++n) {
        const Complex weight = bar.gamma_weighted(n, order, spec.beta);
        Complex term{};
        if (weight != 0.0)
            term = weight * rl_differintegral(spec.chart, spec.alpha - spec.beta * static_cast<double>(n), u, x);
        if (acc.add(term))
            break;
    }
    return acc.result("generalized RL derivative series");
}

inline Complex gfd_rl(const OperatorSpec& spec, const TestFunction& u, double x, const TruncationPolicy& trunc = {}) {
    return gfd_rl_value(spec, u, x, trunc).value;
}

/// Caputo-type generalized derivative: the kernel-bar integral of order m - alpha
/// applied to the m-th phi-derivative of u.
inline SeriesValue gfd_caputo_value(const OperatorSpec& spec, const TestFunction& u, double x,
                                    const TruncationPolicy& trunc = {}) {
    detail::require_variant(spec, OperatorVariant::caputo_derivative, "gfd_caputo");
    detail::check_point(spec.chart, x);
    const int m = spec.m();
    const AnalyticKernel bar = derivative_kernel(spec);
    const Complex order = static_cast<double>(m) - spec.alpha;
    TestFunction du;
    if (u.is_power_sum_on(spec.chart)) {
        du = TestFunction::phi_power_sum(spec.chart, detail::power_sum_phi_derivative(u.terms(), m));
    } else {
        require(u.has_phi_derivatives(spec.chart, m), ErrorKind::missing_derivatives,
                "Caputo derivative needs the m-th phi-derivative of u");
        du = TestFunction::analytic([u, chart = spec.chart, m](double t) { return u.phi_derivative(chart, m, t); });
    }
    if (du.is_power_sum_on(spec.chart) && du.terms().empty())
        return {0.0, 0.0, 0};
    const bool closed = du.is_power_sum_on(spec.chart);
    const double w = spec.chart.phi(x) - spec.chart.phi_a();
    SeriesAccumulator acc(trunc, bar.max_index_hint());
    for (std::size_t n = 0;; ++n) {
        const Complex weight = bar.gamma_weighted(n, order, spec.beta);
        const Complex nu = spec.beta * static_cast<double>(n) + order;
        Complex term{};
        if (weight != 0.0 && x != spec.chart.a) {
            if (closed) {
                for (const PowerTerm& t : du.terms())
                    term += weight * t.coeff * gamma_ratio(t.exponent + 1.0, t.exponent + 1.0 + nu) *
                            offset_power(w, t.exponent + nu);
            } else {
                QuadratureOptions opt;
                if (!u.exact_phi_derivative(spec.chart, m))
                    opt.rel_tol = 1e-5;
                term = weight * integrate_offset([&](double, double v) { return du(spec.chart.at_offset(v)); }, nu, w,
                                                 opt) *
                       rgamma(nu);
            }
        }
        if (acc.add(term))
            break;
    }
    return acc.result("generalized Caputo derivative series");
}

inline Complex gfd_caputo(const OperatorSpec& spec, const TestFunction& u, double x,
                          const TruncationPolicy& trunc = {}) {
    return gfd_caputo_value(spec, u, x, trunc).value;
}

/// Definition route for the RL-type derivative: the m-th phi-derivative (by
/// finite differences in phi) of the kernel-bar integral of order m - alpha.
inline Complex gfd_rl_quadrature(const OperatorSpec& spec, const TestFunction& u, double x,
                                 const TruncationPolicy& trunc = {}) {
    detail::require_variant(spec, OperatorVariant::rl_derivative, "gfd_rl_quadrature");
    detail::check_point(spec.chart, x);
    require(x > spec.chart.a, ErrorKind::domain_mismatch, "derivative is evaluated on (a, b]");
    const int m = spec.m();
    OperatorSpec integral{derivative_kernel(spec), static_cast<double>(m) - spec.alpha, spec.beta, spec.chart,
                          OperatorVariant::integral};
    const PhiChart& c = spec.chart;
    const auto g = [&](double y) { return gfi_quadrature(integral, u, c.inv(y), trunc); };
    const double hi = c.unbounded() ? std::numeric_limits<double>::infinity() : c.phi_b();
    return detail::finite_difference(g, m, c.phi(x), c.phi_a(), hi);
}

/// (dev_B, dev_C): the m-fold composition identities
/// I^m (A-integral of order alpha) = B-integral of order alpha + m and
/// D^m (A-integral of order alpha + m) = C-integral of order alpha, where the
/// left sides use the RL building blocks and the right sides the definition.
inline std::pair<double, double> m_fold_identity_check(const AnalyticKernel& kernel, Complex alpha, Complex beta, int m,
                                                       const PhiChart& chart, const TestFunction& u,
                                                       std::span<const double> grid,
                                                       const TruncationPolicy& trunc = {}) {
    require(m >= 0, ErrorKind::precondition, "m must be non-negative");
    if (m == 0)
        return {0.0, 0.0};
    const double md = static_cast<double>(m);
    const OperatorSpec b_spec{modified_kernel_B(kernel, alpha, beta, m), alpha + md, beta, chart};
    const OperatorSpec c_spec{modified_kernel_C(kernel, alpha, beta, m), alpha, beta, chart};
    b_spec.validate();
    c_spec.validate();
    double dev_b = 0.0, dev_c = 0.0;
    for (double x : grid) {
        Complex lhs_b{}, lhs_c{};
        if (u.is_power_sum_on(chart)) {
            const TestFunction inner_b = gfi_series_expansion({kernel, alpha, beta, chart}, u, trunc);
            lhs_b = rl_integral_wrt(chart, md, inner_b, x);
            const TestFunction inner_c = gfi_series_expansion({kernel, alpha + md, beta, chart}, u, trunc);
            lhs_c = rl_differintegral(chart, md, inner_c, x);
        } else {
            SeriesAccumulator acc_b(trunc, kernel.max_index_hint());
            for (std::size_t n = 0;; ++n) {
                const Complex nu = beta * static_cast<double>(n) + alpha;
                const Complex wgt = kernel.gamma_weighted(n, alpha, beta);
                if (acc_b.add(wgt == 0.0 ? Complex{} : wgt * rl_integral_wrt(chart, nu + md, u, x)))
                    break;
            }
            lhs_b = acc_b.result("m-fold B series").value;
            SeriesAccumulator acc_c(trunc, kernel.max_index_hint());
            for (std::size_t n = 0;; ++n) {
                const Complex nu = beta * static_cast<double>(n) + alpha;
                const Complex wgt = kernel.gamma_weighted(n, alpha + md, beta);
                if (acc_c.add(wgt == 0.0 ? Complex{} : wgt * rl_integral_wrt(chart, nu, u, x)))
                    break;
            }
            lhs_c = acc_c.result("m-fold C series").value;
        }
        dev_b = std::max(dev_b, std::abs(lhs_b - gfi_quadrature(b_spec, u, x, trunc)));
        dev_c = std::max(dev_c, std::abs(lhs_c - gfi_quadrature(c_spec, u, x, trunc)));
    }
    return {dev_b, dev_c};
}

namespace detail {

// The inner operator's result as a function the outer quadrature can sample.
inline TestFunction materialize_inner(const OperatorSpec& inner, const TestFunction& u, const TruncationPolicy& trunc) {
    if (u.is_power_sum_on(inner.chart))
        return gfi_series_expansion(inner, u, trunc);
    const PhiChart& c = inner.chart;
    auto interp = std::make_shared<ChebyshevInterpolant>(
        [&](double y) { return gfi_series(inner, u, c.inv(y), trunc); }, c.phi_a(), c.phi_b());
    return TestFunction::analytic([interp, phi = c.phi](double x) { return (*interp)(phi(x)); });
}

} // namespace detail

/// max over grid of |A_alpha(A_gamma u) - A_gamma(A_alpha u)|: inner operators
/// expanded (or interpolated), outer ones by definition quadrature.
inline double commutativity_check(const OperatorSpec& spec_a, const OperatorSpec& spec_b, const TestFunction& u,
                                  std::span<const double> grid, const TruncationPolicy& trunc = {}) {
    spec_a.validate();
    spec_b.validate();
    require(spec_a.chart.key == spec_b.chart.key && spec_a.chart.a == spec_b.chart.a &&
                spec_a.chart.b == spec_b.chart.b,
            ErrorKind::domain_mismatch, "commutativity check needs one chart");
    const TestFunction b_u = detail::materialize_inner(spec_b, u, trunc);
    const TestFunction a_u = detail::materialize_inner(spec_a, u, trunc);
    double worst = 0.0;
    for (double x : grid) {
        const Complex ab = gfi_quadrature(spec_a, b_u, x, trunc);
        const Complex ba = gfi_quadrature(spec_b, a_u, x, trunc);
        worst = std::max(worst, std::abs(ab - ba));
    }
    return worst;
}

/// max over grid of |A_{alpha,beta}(A_{gamma,beta} u) - A_{alpha+gamma,beta} u|,
/// all by series; zero exactly when the kernel family is a semigroup.
inline double semigroup_order_check(const AnalyticKernel& kernel, Complex alpha, Complex gamma_order, Complex beta,
                                    const PhiChart& chart, const TestFunction& u, std::span<const double> grid,
                                    const TruncationPolicy& trunc = {}) {
    const OperatorSpec outer{kernel, alpha, beta, chart};
    const OperatorSpec inner{kernel, gamma_order, beta, chart};
    const OperatorSpec sum{kernel, alpha + gamma_order, beta, chart};
    const TestFunction iu = detail::materialize_inner(inner, u, trunc);
    double worst = 0.0;
    for (double x : grid) {
        const Complex lhs = iu.is_power_sum_on(chart) ? gfi_series(outer, iu, x, trunc) : gfi_quadrature(outer, iu, x, trunc);
        worst = std::max(worst, std::abs(lhs - gfi_series(sum, u, x, trunc)));
    }
    return worst;
}

} // namespace genfrac
