#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genfrac/complex_gamma.hpp"
#include "genfrac/errors.hpp"
#include "genfrac/kernel.hpp"

namespace genfrac {

/// out[k] = sum_{p+q=k} a[p] b[q] for k = 0..k_max; missing entries count as zero.
inline std::vector<Complex> cauchy_product(std::span<const Complex> a, std::span<const Complex> b, std::size_t k_max) {
    std::vector<Complex> out(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) {
        Complex acc{};
        for (std::size_t p = 0; p <= k && p < a.size(); ++p) {
            const std::size_t q = k - p;
            if (q < b.size())
                acc += a[p] * b[q];
        }
        out[k] = acc;
    }
    return out;
}

/// Sums sum_n coeff(n) z^n under a truncation policy.
template <class CoeffAt>
SeriesValue sum_power_series(CoeffAt&& coeff, Complex z, const TruncationPolicy& trunc,
                             std::optional<std::size_t> last_index, const std::string& what) {
    SeriesAccumulator acc(trunc, last_index);
    Complex zn = 1.0;
    for (std::size_t n = 0;; ++n) {
        if (acc.add(coeff(n) * zn))
            break;
        zn *= z;
    }
    return acc.result(what);
}

/// A(z) with its truncation report.
inline SeriesValue eval_kernel_series(const AnalyticKernel& kernel, Complex alpha, Complex beta, Complex z,
                                      const TruncationPolicy& trunc = {}) {
    if (!(std::abs(z) < kernel.radius()))
        fail(ErrorKind::out_of_disc, "|z| = " + std::to_string(std::abs(z)) + " is outside the kernel disc of radius " +
                                         std::to_string(kernel.radius()));
    if (z == 0.0)
        return {kernel.coefficient(0, alpha, beta), 0.0, 1};
    const std::size_t chunk = trunc.max_terms;
    const std::vector<Complex> coeffs = kernel.coefficients(alpha, beta, chunk);
    return sum_power_series([&](std::size_t n) { return n < coeffs.size() ? coeffs[n] : Complex{}; }, z, trunc,
                            kernel.max_index_hint(), "kernel " + kernel.name());
}

/// A(z) = sum a_n(alpha, beta) z^n.
inline Complex eval_kernel(const AnalyticKernel& kernel, Complex alpha, Complex beta, Complex z,
                           const TruncationPolicy& trunc = {}) {
    return eval_kernel_series(kernel, alpha, beta, z, trunc).value;
}

/// Coefficients a_n Gamma(beta n + alpha) of a kernel at fixed orders.
class GammaSeries {
public:
    GammaSeries(AnalyticKernel source, Complex alpha, Complex beta, std::vector<Complex> coeffs)
        : source_(std::move(source)), alpha_(alpha), beta_(beta), coeffs_(std::move(coeffs)) {}

    Complex alpha() const { return alpha_; }
    Complex beta() const { return beta_; }
    const AnalyticKernel& source() const { return source_; }
    std::size_t size() const { return coeffs_.size(); }
    std::span<const Complex> coefficients() const { return coeffs_; }

    /// Coefficient n; indices past the stored range are computed on the fly.
    Complex coeff(std::size_t n) const {
        if (n < coeffs_.size())
            return coeffs_[n];
        return source_.gamma_weighted(n, alpha_, beta_);
    }

    double radius() const { return source_.gamma_radius(alpha_, beta_); }

    /// A_Gamma(z) summed to the truncation policy.
    SeriesValue evaluate(Complex z, const TruncationPolicy& trunc = {}) const {
        if (!(std::abs(z) < radius()))
            fail(ErrorKind::out_of_disc, "|z| = " + std::to_string(std::abs(z)) +
                                             " is outside the disc of the Gamma-weighted series (radius " +
                                             std::to_string(radius()) + ")");
        return sum_power_series([&](std::size_t n) { return coeff(n); }, z, trunc, source_.max_index_hint(),
                                "Gamma-weighted series of " + source_.name());
    }

    Complex operator()(Complex z, const TruncationPolicy& trunc = {}) const { return evaluate(z, trunc).value; }

private:
    AnalyticKernel source_;
    Complex alpha_;
    Complex beta_;
    std::vector<Complex> coeffs_;
};

/// Builds A_Gamma for (alpha, beta) with coefficients 0..n_max.
inline GammaSeries gamma_series(const AnalyticKernel& kernel, Complex alpha, Complex beta, std::size_t n_max) {
    require(alpha.real() > 0.0, ErrorKind::order_not_positive, "Gamma-weighted series needs Re(alpha) > 0");
    require(beta.real() > 0.0 || (beta == 0.0 && kernel.max_index_hint() == std::size_t{0}),
            ErrorKind::invalid_params, "Gamma-weighted series needs Re(beta) > 0");
    std::vector<Complex> coeffs(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
        const Complex z = beta * static_cast<double>(n) + alpha;
        if (is_gamma_pole(z))
            fail(ErrorKind::gamma_pole, "beta*n + alpha is a pole of Gamma at n = " + std::to_string(n));
        coeffs[n] = kernel.gamma_weighted(n, alpha, beta);
    }
    return {kernel, alpha, beta, std::move(coeffs)};
}

/// floor(Re alpha) + 1.
inline int derivative_order(Complex alpha) { return static_cast<int>(std::floor(alpha.real())) + 1; }

namespace detail {

// Lazily extended forward recurrence for the reciprocal coefficients.
class ReciprocalState {
public:
    ReciprocalState(AnalyticKernel source, Complex alpha, Complex beta, int m)
        : source_(std::move(source)), alpha_(alpha), beta_(beta), m_(m) {
        const Complex a0 = source_.coefficient(0, alpha_, beta_);
        if (a0 == 0.0)
            fail(ErrorKind::zero_leading_coefficient, "a_0 = 0: the kernel has no reciprocal series");
        lead_ = source_.gamma_weighted(0, alpha_, beta_);
        if (lead_ == 0.0)
            fail(ErrorKind::zero_leading_coefficient, "a_0 Gamma(alpha) = 0: the kernel has no reciprocal series");
    }

    Complex coefficient(std::size_t n) {
        std::lock_guard lock(mutex_);
        extend(n + 1);
        return bar_[n];
    }

    // abar_n Gamma(beta n + m - alpha)
    Complex weighted(std::size_t n) {
        std::lock_guard lock(mutex_);
        extend(n + 1);
        return bar_weighted_[n];
    }

    bool finite_source() const { return source_.max_index_hint() == std::size_t{0}; }

private:
    Complex shifted(std::size_t n) const { return beta_ * static_cast<double>(n) + static_cast<double>(m_) - alpha_; }

    void extend(std::size_t count) {
        while (bar_.size() < count) {
            const std::size_t k = bar_.size();
            if (finite_source() && k > 0) {
                bar_.push_back(0.0);
                bar_weighted_.push_back(0.0);
                continue;
            }
            while (weights_.size() <= k)
                weights_.push_back(source_.gamma_weighted(weights_.size(), alpha_, beta_));
            const Complex z = shifted(k);
            if (is_gamma_pole(z))
                fail(ErrorKind::gamma_pole, "beta*n + m - alpha is a pole of Gamma at n = " + std::to_string(k));
            Complex weighted_value;
            if (k == 0) {
                weighted_value = 1.0 / lead_;
            } else {
                Complex acc{};
                for (std::size_t q = 0; q < k; ++q)
                    acc += bar_weighted_[q] * weights_[k - q];
                weighted_value = -acc / lead_;
            }
            bar_weighted_.push_back(weighted_value);
            bar_.push_back(weighted_value == 0.0 ? Complex{} : std::exp(std::log(weighted_value) - lgamma(z)));
        }
    }

    AnalyticKernel source_;
    Complex alpha_;
    Complex beta_;
    int m_;
    Complex lead_;
    std::mutex mutex_;
    std::vector<Complex> weights_;
    std::vector<Complex> bar_;
    std::vector<Complex> bar_weighted_;
};

inline double root_test_radius(const std::vector<Complex>& coeffs) {
    const std::size_t n = coeffs.size();
    if (n < 4)
        return infinite_radius;
    double estimate = 0.0;
    bool any = false;
    for (std::size_t k = n - n / 4; k < n; ++k) {
        const double mag = std::abs(coeffs[k]);
        if (k == 0 || mag == 0.0)
            continue;
        const double r = std::pow(mag, -1.0 / static_cast<double>(k));
        estimate = any ? std::min(estimate, r) : r;
        any = true;
    }
    return any ? estimate : infinite_radius;
}

} // namespace detail

/// Reciprocal kernel: the fixed-order kernel with coefficients abar_n such
/// that (sum a_n Gamma(beta n + alpha) z^n)(sum abar_n Gamma(beta n + m - alpha) z^n) = 1.
///
/// Coefficients are extended on demand past n_max; n_max also sets how many
/// terms feed the root-test estimate used as the kernel radius.
inline AnalyticKernel reciprocal_kernel(const AnalyticKernel& kernel, Complex alpha, Complex beta, int m,
                                        std::size_t n_max = 40) {
    require(m == derivative_order(alpha), ErrorKind::precondition, "reciprocal kernel needs m = floor(Re alpha) + 1");
    require((static_cast<double>(m) - alpha).real() > 0.0, ErrorKind::precondition, "reciprocal kernel needs Re(m - alpha) > 0");
    auto state = std::make_shared<detail::ReciprocalState>(kernel, alpha, beta, m);
    const bool finite = state->finite_source();
    std::vector<Complex> sample;
    const std::size_t probe = std::max<std::size_t>(n_max, 24);
    for (std::size_t n = 0; n <= (finite ? 0 : probe); ++n)
        sample.push_back(state->coefficient(n));
    const double radius = finite ? infinite_radius : detail::root_test_radius(sample);
    AnalyticKernel out("reciprocal(" + kernel.name() + ")",
                       [state](std::size_t n, Complex, Complex) { return state->coefficient(n); }, radius,
                       finite ? std::optional<std::size_t>{0} : std::nullopt);
    out.set_order_independent();
    out.set_gamma_weighted([state](std::size_t n, Complex, Complex) { return state->weighted(n); });
    const double gamma_radius = kernel.gamma_radius(alpha, beta);
    out.set_gamma_radius([gamma_radius, finite](Complex, Complex) { return finite ? infinite_radius : gamma_radius; });
    return out;
}

/// b_n = a_n(alpha, beta) Gamma(beta n + alpha) / Gamma(beta n + alpha + m): the
/// kernel of the order alpha + m operator equal to I^m composed with A's operator.
inline AnalyticKernel modified_kernel_B(const AnalyticKernel& kernel, Complex alpha, Complex beta, int m) {
    require(m >= 0, ErrorKind::precondition, "m must be non-negative");
    if (m == 0)
        return kernel;
    auto coeff = [kernel, alpha, beta, m](std::size_t n, Complex, Complex) -> Complex {
        const Complex z = beta * static_cast<double>(n) + alpha;
        const Complex a = kernel.coefficient(n, alpha, beta);
        if (a == 0.0)
            return 0.0;
        if (is_gamma_pole(z) || is_gamma_pole(z + static_cast<double>(m)))
            fail(ErrorKind::gamma_pole, "Gamma argument of the modified kernel is a pole");
        return a / pochhammer(z, static_cast<std::size_t>(m));
    };
    AnalyticKernel out("B(" + kernel.name() + ")", coeff, kernel.radius(), kernel.max_index_hint());
    out.set_order_independent();
    out.set_gamma_weighted([kernel, alpha, beta](std::size_t n, Complex, Complex) {
        return kernel.gamma_weighted(n, alpha, beta);
    });
    return out;
}

/// c_n = a_n(alpha + m, beta) Gamma(beta n + alpha + m) / Gamma(beta n + alpha): the
/// order alpha kernel equal to the m-th phi-derivative of A's order alpha + m operator.
inline AnalyticKernel modified_kernel_C(const AnalyticKernel& kernel, Complex alpha, Complex beta, int m) {
    require(m >= 0, ErrorKind::precondition, "m must be non-negative");
    if (m == 0)
        return kernel;
    const Complex shifted = alpha + static_cast<double>(m);
    auto coeff = [kernel, alpha, beta, m, shifted](std::size_t n, Complex, Complex) -> Complex {
        const Complex z = beta * static_cast<double>(n) + alpha;
        const Complex a = kernel.coefficient(n, shifted, beta);
        if (a == 0.0)
            return 0.0;
        if (is_gamma_pole(z))
            fail(ErrorKind::gamma_pole, "Gamma argument of the modified kernel is a pole");
        return a * pochhammer(z, static_cast<std::size_t>(m));
    };
    AnalyticKernel out("C(" + kernel.name() + ")", coeff, kernel.radius(), kernel.max_index_hint());
    out.set_order_independent();
    out.set_gamma_weighted([kernel, beta, shifted](std::size_t n, Complex, Complex) {
        return kernel.gamma_weighted(n, shifted, beta);
    });
    return out;
}

/// Residuals of a coefficient identity, indexed by k.
struct SemigroupReport {
    std::size_t k_max = 0;
    std::vector<Complex> residuals;
    bool passed = false;
    double tolerance = 1e-10;
    /// Root-test estimate of the reciprocal kernel's radius, when one was built.
    std::optional<double> reciprocal_radius;

    double max_residual() const {
        double out = 0.0;
        for (const Complex& r : residuals)
            out = std::max(out, std::abs(r));
        return out;
    }
};

namespace detail {

inline SemigroupReport finish_report(std::vector<Complex> residuals, double tol) {
    SemigroupReport report;
    report.k_max = residuals.empty() ? 0 : residuals.size() - 1;
    report.tolerance = tol;
    report.residuals = std::move(residuals);
    report.passed = true;
    for (const Complex& r : report.residuals)
        report.passed = report.passed && std::abs(r) <= tol;
    return report;
}

} // namespace detail

/// Condition for I^{alpha,beta} I^{gamma,beta} = I^{alpha+gamma,beta}:
/// residual_k = a_k(alpha+gamma) Gamma(beta k + alpha + gamma)
///              - sum_{m+n=k} a_n(alpha) a_m(gamma) Gamma(beta n + alpha) Gamma(beta m + gamma).
inline SemigroupReport check_semigroup_one_param(const AnalyticKernel& family, Complex alpha, Complex gamma,
                                                 Complex beta, std::size_t k_max, double tol = 1e-10) {
    const GammaSeries left = gamma_series(family, alpha, beta, k_max);
    const GammaSeries right = gamma_series(family, gamma, beta, k_max);
    const GammaSeries sum = gamma_series(family, alpha + gamma, beta, k_max);
    const std::vector<Complex> product = cauchy_product(left.coefficients(), right.coefficients(), k_max);
    std::vector<Complex> residuals(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k)
        residuals[k] = sum.coeff(k) - product[k];
    return detail::finish_report(std::move(residuals), tol);
}

/// Condition for D^{alpha,beta} I^{gamma,beta} = D^{alpha-gamma,beta}:
/// residual_k = abar_k(alpha-gamma) Gamma(beta k - alpha + gamma + m')
///              - sum_{n+p=k} abar_n(alpha) a_p(gamma) Gamma(beta n - alpha + m) Gamma(beta p + gamma),
/// with m = floor(Re alpha) + 1 and m' = floor(Re(alpha - gamma)) + 1.
inline SemigroupReport check_composition_DI(const AnalyticKernel& family, Complex alpha, Complex gamma, Complex beta,
                                            std::size_t k_max, double tol = 1e-10) {
    require(gamma.real() < alpha.real(), ErrorKind::precondition, "composition check needs Re(gamma) < Re(alpha)");
    require(gamma.real() > 0.0, ErrorKind::order_not_positive, "composition check needs Re(gamma) > 0");
    const Complex diff = alpha - gamma;
    const AnalyticKernel outer = reciprocal_kernel(family, alpha, beta, derivative_order(alpha), k_max);
    const AnalyticKernel target = reciprocal_kernel(family, diff, beta, derivative_order(diff), k_max);
    const GammaSeries inner = gamma_series(family, gamma, beta, k_max);
    std::vector<Complex> outer_w(k_max + 1);
    std::vector<Complex> target_w(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) {
        outer_w[k] = outer.gamma_weighted(k, alpha, beta);
        target_w[k] = target.gamma_weighted(k, diff, beta);
    }
    const std::vector<Complex> product = cauchy_product(outer_w, inner.coefficients(), k_max);
    std::vector<Complex> residuals(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k)
        residuals[k] = target_w[k] - product[k];
    SemigroupReport report = detail::finish_report(std::move(residuals), tol);
    report.reciprocal_radius = outer.radius();
    return report;
}

/// Largest |a_n(alpha,beta) Gamma(beta n + alpha) a_m(gamma,delta) Gamma(delta m + gamma)|
/// over m != n with n, m <= k_max. A two-parameter semigroup law needs all of them to vanish.
struct CrossTermReport {
    double max_cross_term = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
};

inline CrossTermReport two_parameter_cross_terms(const AnalyticKernel& family, Complex alpha, Complex beta,
                                                 Complex gamma, Complex delta, std::size_t k_max) {
    const GammaSeries first = gamma_series(family, alpha, beta, k_max);
    const GammaSeries second = gamma_series(family, gamma, delta, k_max);
    CrossTermReport report;
    for (std::size_t n = 0; n <= k_max; ++n)
        for (std::size_t m = 0; m <= k_max; ++m) {
            if (m == n)
                continue;
            const double value = std::abs(first.coeff(n) * second.coeff(m));
            if (value > report.max_cross_term)
                report = {value, n, m};
        }
    return report;
}

} // namespace genfrac
