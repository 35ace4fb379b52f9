#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "genfrac/chart.hpp"
#include "genfrac/complex_gamma.hpp"
#include "genfrac/errors.hpp"

namespace genfrac {

/// Gauss rule on [-1, 1] for the weight (1 - xi)^exponent.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double exponent = 0.0;
    int order = 0;
};

namespace detail {

inline QuadratureRule build_jacobi_rule(int n, double a) {
    const double b = 0.0;
    const double ab = a + b;
    auto alpha_k = [&](int k) {
        if (k == 0)
            return (b - a) / (ab + 2.0);
        return (b * b - a * a) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0));
    };
    auto beta_k = [&](int k) {
        if (k == 1)
            return 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        const double s = 2.0 * k + ab;
        return 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    };
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                                std::lgamma(ab + 2.0));

    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max(n - 1, 0));
    for (int k = 0; k < n; ++k)
        diag[k] = alpha_k(k);
    for (int k = 1; k < n; ++k)
        sub[k - 1] = std::sqrt(beta_k(k));

    std::vector<double> nodes(n);
    if (n == 1) {
        nodes[0] = diag[0];
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        for (int i = 0; i < n; ++i)
            nodes[i] = solver.eigenvalues()[i];
    }

    // Orthonormal values p_0..p_{n-1} at x; p_n and p_n' for Newton.
    auto evaluate = [&](double x, std::vector<double>& p, double& pn, double& dpn) {
        p.assign(n, 0.0);
        p[0] = 1.0 / std::sqrt(mu0);
        double prev = 0.0, dprev = 0.0;
        double cur = p[0], dcur = 0.0;
        for (int k = 0; k < n; ++k) {
            const double sb_k = k == 0 ? 0.0 : std::sqrt(beta_k(k));
            const double sb_next = std::sqrt(beta_k(k + 1));
            const double next = ((x - alpha_k(k)) * cur - sb_k * prev) / sb_next;
            const double dnext = (cur + (x - alpha_k(k)) * dcur - sb_k * dprev) / sb_next;
            prev = cur;
            dprev = dcur;
            cur = next;
            dcur = dnext;
            if (k + 1 < n)
                p[k + 1] = cur;
        }
        pn = cur;
        dpn = dcur;
    };

    QuadratureRule rule;
    rule.exponent = a;
    rule.order = n;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    std::vector<double> p;
    for (int i = 0; i < n; ++i) {
        double x = nodes[i];
        double pn = 0.0, dpn = 0.0;
        for (int it = 0; it < 3; ++it) {
            evaluate(x, p, pn, dpn);
            if (dpn == 0.0)
                break;
            const double step = pn / dpn;
            x -= step;
            if (std::abs(step) < 1e-17)
                break;
        }
        evaluate(x, p, pn, dpn);
        double s = 0.0;
        for (double v : p)
            s += v * v;
        rule.nodes[i] = x;
        rule.weights[i] = 1.0 / s;
    }
    return rule;
}

} // namespace detail

/// Cached Gauss-Jacobi rule; thread-safe.
inline const QuadratureRule& gauss_jacobi_rule(int order, double exponent) {
    require(order >= 1, ErrorKind::precondition, "quadrature order must be positive");
    require(std::isfinite(exponent) && exponent > -1.0, ErrorKind::invalid_exponent,
            "Jacobi exponent must exceed -1");
    static std::mutex mutex;
    static std::map<std::pair<int, double>, std::unique_ptr<const QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{order, exponent}];
    if (!slot)
        slot = std::make_unique<const QuadratureRule>(detail::build_jacobi_rule(order, exponent));
    return *slot;
}

inline const QuadratureRule& gauss_legendre_rule(int order) { return gauss_jacobi_rule(order, 0.0); }

struct QuadratureOptions {
    int order = 32;
    int levels = 30;
    double grading = 0.15;
    double rel_tol = 1e-8;
};

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

struct OffsetSums {
    Complex high;
    Complex low;
    double magnitude = 0.0;
};

// Adds one panel of s^{alpha-1} F over s in [s0, s1] (or over w when `in_w`).
template <class F>
void offset_panel(const F& f, Complex alpha, double L, double lo, double hi, bool in_w, int order, OffsetSums& sums) {
    const QuadratureRule& hi_rule = gauss_legendre_rule(order);
    const QuadratureRule& lo_rule = gauss_legendre_rule(std::max(order / 2, 1));
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    auto integrand = [&](double xi) {
        const double v = mid + half * xi;
        const double s = in_w ? L - v : v;
        const double w = in_w ? v : L - v;
        return std::pow(Complex(s, 0.0), alpha - 1.0) * f(s, w);
    };
    for (int i = 0; i < hi_rule.order; ++i) {
        const Complex val = hi_rule.weights[i] * half * integrand(hi_rule.nodes[i]);
        sums.high += val;
        sums.magnitude += std::abs(val);
    }
    for (int i = 0; i < lo_rule.order; ++i)
        sums.low += lo_rule.weights[i] * half * integrand(lo_rule.nodes[i]);
}

} // namespace detail

/// Integral over s in [0, L] of s^{alpha-1} f(s, L - s). f receives both the
/// distance s from the singular end and the complement w, each computed
/// exactly near its own endpoint. Graded panels toward both ends; the
/// innermost singular panel uses a Gauss-Jacobi rule.
template <class F>
Complex integrate_offset(const F& f, Complex alpha, double L, const QuadratureOptions& opt = {}) {
    require(alpha.real() > 0.0, ErrorKind::order_not_positive, "integration order needs Re(alpha) > 0");
    if (L == 0.0)
        return 0.0;
    require(L > 0.0 && std::isfinite(L), ErrorKind::domain_mismatch, "integration length must be positive");
    const double a = alpha.real() - 1.0;
    const Complex im_part{0.0, alpha.imag()};
    detail::OffsetSums sums;

    const double half = 0.5 * L;
    double inner = half * std::pow(opt.grading, opt.levels);
    {
        // Innermost panel [0, inner]: s = inner (1 - xi) / 2.
        const QuadratureRule& hi_rule = gauss_jacobi_rule(opt.order, a);
        const QuadratureRule& lo_rule = gauss_jacobi_rule(std::max(opt.order / 2, 1), a);
        const double scale = std::pow(0.5 * inner, a + 1.0);
        auto integrand = [&](double xi) {
            const double s = 0.5 * inner * (1.0 - xi);
            Complex v = f(s, L - s);
            if (alpha.imag() != 0.0)
                v *= std::exp(im_part * std::log(s));
            return v;
        };
        for (int i = 0; i < hi_rule.order; ++i) {
            const Complex val = scale * hi_rule.weights[i] * integrand(hi_rule.nodes[i]);
            sums.high += val;
            sums.magnitude += std::abs(val);
        }
        for (int i = 0; i < lo_rule.order; ++i)
            sums.low += scale * lo_rule.weights[i] * integrand(lo_rule.nodes[i]);
    }
    double lo = inner;
    for (int k = opt.levels - 1; k >= 0; --k) {
        const double hi = half * std::pow(opt.grading, k);
        detail::offset_panel(f, alpha, L, lo, hi, false, opt.order, sums);
        lo = hi;
    }
    double w_inner = half * std::pow(opt.grading, opt.levels);
    detail::offset_panel(f, alpha, L, 0.0, w_inner, true, opt.order, sums);
    lo = w_inner;
    for (int k = opt.levels - 1; k >= 0; --k) {
        const double hi = half * std::pow(opt.grading, k);
        detail::offset_panel(f, alpha, L, lo, hi, true, opt.order, sums);
        lo = hi;
    }

    const double scale = std::max(std::abs(sums.high), sums.magnitude);
    const double diff = std::abs(sums.high - sums.low);
    if (!std::isfinite(std::abs(sums.high)) || diff > opt.rel_tol * scale)
        fail(ErrorKind::quadrature_failure, "singular quadrature did not converge: orders " +
                                                std::to_string(opt.order) + " and " + std::to_string(opt.order / 2) +
                                                " differ by " + detail::sci(diff) + " on a scale of " +
                                                detail::sci(scale));
    return sums.high;
}

/// Integral over t in [a, x] of phi'(t) (phi(x) - phi(t))^{alpha-1} g(t).
template <class G>
Complex integrate_singular(const G& g, const PhiChart& chart, Complex alpha, double x, int order = 32) {
    require(alpha.real() > 0.0, ErrorKind::order_not_positive, "integration order needs Re(alpha) > 0");
    require(x >= chart.a && x <= chart.b, ErrorKind::domain_mismatch, "x lies outside the chart domain");
    const double L = chart.phi(x) - chart.phi_a();
    QuadratureOptions opt;
    opt.order = order;
    return integrate_offset([&](double, double w) -> Complex { return g(chart.at_offset(w)); }, alpha, L, opt);
}

namespace detail {

struct Kronrod15 {
    static constexpr std::array<double, 8> x = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

struct Segment {
    double lo, hi;
    Complex value;
    double error;
    double magnitude;
    int depth;
    bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment gk15(const F& f, double lo, double hi, int depth) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    const Complex fc = f(mid);
    Complex k = fc * Kronrod15::wk[7];
    Complex g = fc * Kronrod15::wg[3];
    double mag = std::abs(fc) * Kronrod15::wk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * Kronrod15::x[j];
        const Complex f1 = f(mid - dx);
        const Complex f2 = f(mid + dx);
        k += Kronrod15::wk[j] * (f1 + f2);
        mag += Kronrod15::wk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1)
            g += Kronrod15::wg[j / 2] * (f1 + f2);
    }
    Segment s{lo, hi, k * half, std::abs((k - g) * half), mag * std::abs(half), depth};
    return s;
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (15/7) integration on [a, b], with a
/// polynomial substitution that grades the mesh toward both endpoints so
/// integrable endpoint singularities are handled. Singular integrands should
/// be written so the singular endpoint is a, where doubles are dense.
template <class F>
Complex adaptive_integrate(const F& f, double a, double b, double tol = 1e-12, int max_depth = 50) {
    require(tol > 0.0, ErrorKind::precondition, "tolerance must be positive");
    if (a == b)
        return 0.0;
    require(std::isfinite(a) && std::isfinite(b), ErrorKind::domain_mismatch, "adaptive_integrate needs a finite interval");
    const double len = b - a;
    // t = a + len P(u) with P' = 630 u^4 (1-u)^4; each half is evaluated from
    // its own endpoint so distances to a and b stay exact.
    auto grade = [](double u) { return u * u * u * u * u * (126.0 + u * (-420.0 + u * (540.0 + u * (-315.0 + 70.0 * u)))); };
    auto mapped = [&](double u) -> Complex {
        const double t = u <= 0.5 ? a + len * grade(u) : b - len * grade(1.0 - u);
        const double v = u * (1.0 - u);
        const double jac = 630.0 * len * v * v * v * v;
        if (jac == 0.0 || t <= a || t >= b)
            return 0.0;
        return Complex(f(t)) * jac;
    };
    std::priority_queue<detail::Segment> queue;
    Complex total{};
    double err = 0.0, mag = 0.0;
    auto push = [&](const detail::Segment& s) {
        queue.push(s);
        total += s.value;
        err += s.error;
        mag += s.magnitude;
    };
    for (int i = 0; i < 4; ++i)
        push(detail::gk15(mapped, i / 4.0, (i + 1) / 4.0, 0));
    constexpr int max_segments = 200000;
    int segments = 4;
    const double eps = std::numeric_limits<double>::epsilon();
    while (true) {
        if (!std::isfinite(err) || !std::isfinite(std::abs(total)))
            fail(ErrorKind::no_convergence, "adaptive integration produced non-finite values");
        if (err <= tol * std::max(std::abs(total), 1e-3 * mag) || queue.empty())
            break;
        const detail::Segment worst = queue.top();
        queue.pop();
        total -= worst.value;
        err -= worst.error;
        mag -= worst.magnitude;
        if (worst.error <= 50.0 * eps * worst.magnitude) {
            // Rounding-limited: keep the value, stop refining it.
            total += worst.value;
            mag += worst.magnitude;
            continue;
        }
        if (worst.depth >= max_depth || segments >= max_segments)
            fail(ErrorKind::no_convergence, "adaptive integration exceeded its subdivision limit");
        const double mid = 0.5 * (worst.lo + worst.hi);
        push(detail::gk15(mapped, worst.lo, mid, worst.depth + 1));
        push(detail::gk15(mapped, mid, worst.hi, worst.depth + 1));
        ++segments;
        err = std::max(err, 0.0);
    }
    return total;
}

} // namespace genfrac
