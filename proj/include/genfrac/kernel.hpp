#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "genfrac/complex_gamma.hpp"
#include "genfrac/errors.hpp"

namespace genfrac {

inline constexpr double infinite_radius = std::numeric_limits<double>::infinity();

/// How many terms of a power series to keep.
struct TruncationPolicy {
    enum class Mode { fixed_n, tail_bound };

    std::size_t max_terms = 120;
    double tail_tol = 1e-14;
    Mode mode = Mode::tail_bound;

    static TruncationPolicy fixed(std::size_t n) { return {n, 0.0, Mode::fixed_n}; }
    static TruncationPolicy tail(double tol, std::size_t max_terms = 120) {
        return {max_terms, tol, Mode::tail_bound};
    }
};

/// A truncated sum together with an estimate of the neglected remainder.
struct SeriesValue {
    Complex value{};
    double tail_estimate = 0.0;
    std::size_t terms = 0;
};

/// Sums series terms one at a time and decides when to stop.
///
/// The tail estimate compares the largest magnitude in the latest window of
/// three terms with the window before it. Windows (rather than single terms)
/// keep kernels with vanishing odd or even coefficients from looking converged.
class SeriesAccumulator {
public:
    explicit SeriesAccumulator(TruncationPolicy policy, std::optional<std::size_t> last_index = std::nullopt)
        : policy_(policy), last_index_(last_index) {}

    /// Adds the next term; returns true once summation should stop.
    bool add(Complex term) {
        sum_ += term;
        magnitudes_.push_back(std::abs(term));
        ++count_;
        if (last_index_ && count_ > *last_index_) {
            tail_ = 0.0;
            done_ = true;
            return true;
        }
        update_tail();
        if (policy_.mode == TruncationPolicy::Mode::fixed_n) {
            done_ = count_ >= policy_.max_terms;
            return done_;
        }
        if (count_ >= 6 && tail_ <= policy_.tail_tol * std::abs(sum_)) {
            done_ = true;
            return true;
        }
        if (count_ >= policy_.max_terms)
            return true;
        return false;
    }

    bool converged() const {
        return done_ || (policy_.mode == TruncationPolicy::Mode::fixed_n && count_ >= policy_.max_terms);
    }

    std::size_t count() const { return count_; }
    Complex sum() const { return sum_; }
    double tail() const { return tail_; }

    /// Result of the summation; throws NoConvergence in tail-bound mode when
    /// the tolerance was not met within max_terms.
    SeriesValue result(const std::string& what = "series") const {
        if (policy_.mode == TruncationPolicy::Mode::tail_bound && !done_)
            fail(ErrorKind::no_convergence, what + " did not meet tail tolerance within " +
                                                std::to_string(policy_.max_terms) + " terms");
        return {sum_, tail_, count_};
    }

private:
    void update_tail() {
        const std::size_t n = magnitudes_.size();
        if (n < 6) {
            tail_ = std::numeric_limits<double>::infinity();
            return;
        }
        const double current = std::max({magnitudes_[n - 1], magnitudes_[n - 2], magnitudes_[n - 3]});
        const double previous = std::max({magnitudes_[n - 4], magnitudes_[n - 5], magnitudes_[n - 6]});
        if (current == 0.0) {
            tail_ = 0.0;
            return;
        }
        if (previous == 0.0 || !std::isfinite(current)) {
            tail_ = std::numeric_limits<double>::infinity();
            return;
        }
        const double q = std::cbrt(current / previous);
        tail_ = q < 1.0 ? current * q / (1.0 - q) : std::numeric_limits<double>::infinity();
    }

    TruncationPolicy policy_;
    std::optional<std::size_t> last_index_;
    std::vector<double> magnitudes_;
    Complex sum_{};
    double tail_ = std::numeric_limits<double>::infinity();
    std::size_t count_ = 0;
    bool done_ = false;
};

/// Coefficient stream a_n(alpha, beta) of an analytic kernel.
using CoefficientFn = std::function<Complex(std::size_t n, Complex alpha, Complex beta)>;

/// Radius of convergence of the Gamma-weighted series at given orders.
using GammaRadiusFn = std::function<double(Complex alpha, Complex beta)>;

/// Power series A(z) = sum a_n z^n with possibly order-dependent coefficients.
///
/// Copies share one coefficient cache; the cache is guarded so a kernel may be
/// evaluated from several threads at once.
class AnalyticKernel {
public:
    AnalyticKernel() = default;

    AnalyticKernel(std::string name, CoefficientFn coeff, double radius,
                   std::optional<std::size_t> max_index_hint = std::nullopt)
        : state_(std::make_shared<State>()) {
        require(static_cast<bool>(coeff), ErrorKind::invalid_params, "kernel needs a coefficient function");
        require(radius > 0.0, ErrorKind::invalid_params, "kernel radius must be positive");
        state_->name = std::move(name);
        state_->coeff = std::move(coeff);
        state_->radius = radius;
        state_->hint = max_index_hint;
    }

    const std::string& name() const { return state().name; }
    double radius() const { return state().radius; }
    std::optional<std::size_t> max_index_hint() const { return state().hint; }
    bool order_independent() const { return state().order_independent; }

    /// a_n(alpha, beta); zero past the index hint.
    Complex coefficient(std::size_t n, Complex alpha, Complex beta) const {
        if (state().hint && n > *state().hint)
            return 0.0;
        return coefficients(alpha, beta, n + 1)[n];
    }

    /// a_0 .. a_{count-1}, memoized per (alpha, beta).
    std::vector<Complex> coefficients(Complex alpha, Complex beta, std::size_t count) const {
        const State& s = state();
        const Key key = s.order_independent ? Key{} : make_key(alpha, beta);
        std::lock_guard lock(s.mutex);
        std::vector<Complex>& cached = s.cache[key];
        while (cached.size() < count) {
            const std::size_t n = cached.size();
            cached.push_back(s.hint && n > *s.hint ? Complex{} : s.coeff(n, alpha, beta));
        }
        return {cached.begin(), cached.begin() + static_cast<std::ptrdiff_t>(count)};
    }

    /// a_n(alpha, beta) * Gamma(beta n + alpha), accurate even when both
    /// factors are extreme.
    Complex gamma_weighted(std::size_t n, Complex alpha, Complex beta) const {
        if (state().hint && n > *state().hint)
            return 0.0;
        if (state().weighted)
            return state().weighted(n, alpha, beta);
        const Complex z = beta * static_cast<double>(n) + alpha;
        if (is_gamma_pole(z))
            fail(ErrorKind::gamma_pole, "Gamma argument beta*n + alpha is a pole at n = " + std::to_string(n));
        return scaled_gamma(coefficient(n, alpha, beta), z);
    }

    /// Radius of convergence of sum a_n Gamma(beta n + alpha) z^n.
    double gamma_radius(Complex alpha, Complex beta) const {
        if (state().gamma_radius)
            return state().gamma_radius(alpha, beta);
        if (state().hint)
            return infinite_radius;
        return state().radius;
    }

    /// Direct formula for the Gamma-weighted coefficients.
    AnalyticKernel& set_gamma_weighted(CoefficientFn weighted) {
        state_->weighted = std::move(weighted);
        return *this;
    }
    AnalyticKernel& set_gamma_radius(GammaRadiusFn fn) {
        state_->gamma_radius = std::move(fn);
        return *this;
    }
    /// Coefficients ignore (alpha, beta); all orders share one cache entry.
    AnalyticKernel& set_order_independent(bool flag = true) {
        state_->order_independent = flag;
        return *this;
    }

    bool valid() const { return static_cast<bool>(state_); }

    friend bool operator==(const AnalyticKernel& lhs, const AnalyticKernel& rhs) {
        return lhs.state_ == rhs.state_;
    }

private:
    using Key = std::array<double, 4>;

    static Key make_key(Complex alpha, Complex beta) {
        return {alpha.real(), alpha.imag(), beta.real(), beta.imag()};
    }

    struct State {
        std::string name;
        CoefficientFn coeff;
        CoefficientFn weighted;
        GammaRadiusFn gamma_radius;
        double radius = infinite_radius;
        std::optional<std::size_t> hint;
        bool order_independent = false;
        mutable std::mutex mutex;
        mutable std::map<Key, std::vector<Complex>> cache;
    };

    const State& state() const {
        require(static_cast<bool>(state_), ErrorKind::precondition, "empty kernel");
        return *state_;
    }

    std::shared_ptr<State> state_;
};

namespace detail {

// lambda^n / n!, by running product while it cannot underflow.
inline double power_over_factorial(double lambda, std::size_t n) {
    if (n == 0)
        return 1.0;
    if (lambda == 0.0)
        return 0.0;
    if (n <= 150) {
        double out = 1.0;
        for (std::size_t j = 1; j <= n; ++j)
            out *= lambda / static_cast<double>(j);
        return out;
    }
    const double mag = std::exp(static_cast<double>(n) * std::log(std::abs(lambda)) -
                                std::lgamma(static_cast<double>(n) + 1.0));
    return (lambda < 0.0 && n % 2 == 1) ? -mag : mag;
}

// Radius of sum Gamma(beta n + alpha) lambda^n / n! z^n.
inline double exp_family_gamma_radius(double lambda_abs, Complex beta) {
    const double b = beta.real();
    if (lambda_abs == 0.0 || b < 1.0 - 1e-14)
        return infinite_radius;
    if (b <= 1.0 + 1e-14)
        return 1.0 / lambda_abs;
    return std::numeric_limits<double>::min();
}

inline double param_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

} // namespace detail

/// Riemann-Liouville kernel: a_0 = 1/Gamma(alpha), all other terms zero.
inline AnalyticKernel make_rl_kernel() {
    AnalyticKernel kernel("rl", [](std::size_t n, Complex alpha, Complex) -> Complex {
        return n == 0 ? rgamma(alpha) : Complex{};
    }, infinite_radius, 0);
    kernel.set_gamma_weighted([](std::size_t n, Complex alpha, Complex) -> Complex {
        if (n != 0)
            return 0.0;
        return is_gamma_pole(alpha) ? Complex{} : Complex{1.0};
    });
    return kernel;
}

/// a_n = lambda^n / n!, so A(z) = exp(lambda z) independent of the order.
inline AnalyticKernel make_exp_kernel(double lambda = 1.0) {
    AnalyticKernel kernel("exp", [lambda](std::size_t n, Complex, Complex) {
        return detail::power_over_factorial(lambda, n);
    }, infinite_radius);
    kernel.set_order_independent();
    kernel.set_gamma_weighted([lambda](std::size_t n, Complex alpha, Complex beta) -> Complex {
        if (lambda == 0.0 && n > 0)
            return 0.0;
        const Complex z = beta * static_cast<double>(n) + alpha;
        if (is_gamma_pole(z))
            fail(ErrorKind::gamma_pole, "Gamma argument beta*n + alpha is a pole");
        const Complex sign = (lambda < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
        const double log_lambda = lambda == 0.0 ? 0.0 : std::log(std::abs(lambda));
        return sign * std::exp(lgamma(z) + static_cast<double>(n) * log_lambda -
                               std::lgamma(static_cast<double>(n) + 1.0));
    });
    kernel.set_gamma_radius([lambda](Complex, Complex beta) {
        return detail::exp_family_gamma_radius(std::abs(lambda), beta);
    });
    return kernel;
}

/// a_n = (-lambda)^n / (n! Gamma(alpha)); on the log chart this gives the
/// Hadamard-type weight (t/x)^lambda.
inline AnalyticKernel make_tempered_kernel(double lambda = 1.0) {
    AnalyticKernel kernel("tempered", [lambda](std::size_t n, Complex alpha, Complex) {
        return detail::power_over_factorial(-lambda, n) * rgamma(alpha);
    }, infinite_radius);
    kernel.set_gamma_weighted([lambda](std::size_t n, Complex alpha, Complex beta) -> Complex {
        if (is_gamma_pole(alpha))
            return 0.0;
        if (lambda == 0.0 && n > 0)
            return 0.0;
        const Complex z = beta * static_cast<double>(n) + alpha;
        if (is_gamma_pole(z))
            fail(ErrorKind::gamma_pole, "Gamma argument beta*n + alpha is a pole");
        const Complex sign = (lambda > 0.0 && n % 2 == 1) ? -1.0 : 1.0;
        const double log_lambda = lambda == 0.0 ? 0.0 : std::log(std::abs(lambda));
        return sign * std::exp(lgamma(z) - lgamma(alpha) + static_cast<double>(n) * log_lambda -
                               std::lgamma(static_cast<double>(n) + 1.0));
    });
    kernel.set_gamma_radius([lambda](Complex, Complex beta) {
        return detail::exp_family_gamma_radius(std::abs(lambda), beta);
    });
    return kernel;
}

/// Three-parameter Mittag-Leffler kernel:
/// a_n = (rho)_n omega^n / (n! Gamma(beta n + alpha)), so that the
/// Gamma-weighted series is (1 - omega z)^(-rho).
inline AnalyticKernel make_prabhakar_kernel(double rho = 1.0, double omega = 1.0) {
    auto weighted = [rho, omega](std::size_t n, Complex, Complex) -> Complex {
        Complex out = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            out *= (rho + static_cast<double>(j)) * omega / static_cast<double>(j + 1);
        return out;
    };
    AnalyticKernel kernel("prabhakar", [weighted](std::size_t n, Complex alpha, Complex beta) {
        return weighted(n, alpha, beta) * rgamma(beta * static_cast<double>(n) + alpha);
    }, infinite_radius);
    kernel.set_gamma_weighted(weighted);
    kernel.set_gamma_radius([rho, omega](Complex, Complex) {
        const bool polynomial = rho <= 0.0 && std::floor(rho) == rho;
        return (omega == 0.0 || polynomial) ? infinite_radius : 1.0 / std::abs(omega);
    });
    return kernel;
}

/// Kernel from an explicit, order-independent coefficient list.
inline AnalyticKernel make_list_kernel(std::vector<Complex> coeffs, double radius = infinite_radius) {
    require(!coeffs.empty(), ErrorKind::invalid_params, "coefficient list is empty");
    const std::size_t last = coeffs.size() - 1;
    auto shared = std::make_shared<const std::vector<Complex>>(std::move(coeffs));
    AnalyticKernel kernel("list", [shared](std::size_t n, Complex, Complex) {
        return n < shared->size() ? (*shared)[n] : Complex{};
    }, radius, last);
    kernel.set_order_independent();
    return kernel;
}

/// Preset lookup by name: rl, exp (lambda), tempered (lambda), prabhakar (rho, omega).
inline AnalyticKernel make_kernel_preset(const std::string& name, const std::map<std::string, double>& params = {}) {
    if (name == "rl")
        return make_rl_kernel();
    if (name == "exp")
        return make_exp_kernel(detail::param_or(params, "lambda", 1.0));
    if (name == "tempered")
        return make_tempered_kernel(detail::param_or(params, "lambda", 1.0));
    if (name == "prabhakar" || name == "mittag_leffler")
        return make_prabhakar_kernel(detail::param_or(params, "rho", 1.0), detail::param_or(params, "omega", 1.0));
    fail(ErrorKind::unknown_preset, "unknown kernel preset '" + name + "'");
}

} // namespace genfrac
